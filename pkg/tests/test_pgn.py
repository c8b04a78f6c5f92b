"""PGN ingestion: header/movetext parsing, error isolation, store format."""

import io

import pytest

from chessvec.core import (DRAW, GameRecord, StoreGame, game_to_store_line,
                           initial_board, move_to_long, parse_pgn, read_store,
                           write_pgn, write_store)
from chessvec.errors import GameError

# A Najdorf that ends in a draw by repeated knight checks; the long-token
# rendering is frozen as the expected normalized store content.
NAJDORF_PGN = """\
[Event "Candidates"]
[White "White"]
[Black "Black"]
[Result "1/2-1/2"]

1. e4 c5 2. Nf3 d6 3. d4 cxd4 4. Nxd4 Nf6 5. Nc3 a6 6. Be2 e6 7. O-O Be7
8. f4 O-O 9. Be3 Nc6 10. Kh1 Bd7 11. a4 Rc8 12. Nb3 Na5 13. Nd2 Bc6
14. Bd3 d5 15. e5 d4 16. Bxd4 Qxd4 17. exf6 Bb4 18. fxg7 Qxg7 19. Nf3 Bxc3
20. bxc3 Bd5 21. Qe2 Rxc3 22. Rae1 Nc6 23. Qd2 Kh8 24. Re3 Nb4 25. Ne5 Nxd3
26. cxd3 Rfc8 27. Rg3 Rc2 28. Qb4 Rxg2 29. Nxf7+ Kg8 30. Nh6+ Kh8 31. Nf7+
Kg8 32. Nh6+ 1/2-1/2
"""

NAJDORF_TOKENS = (
    "Pe2e4 pc7c5 Ng1f3 pd7d6 Pd2d4 pc5d4 Nf3d4 ng8f6 Nb1c3 pa7a6 Bf1e2 pe7e6"
    " Ke1g1 bf8e7 Pf2f4 ke8g8 Bc1e3 nb8c6 Kg1h1 bc8d7 Pa2a4 ra8c8 Nd4b3 nc6a5"
    " Nb3d2 bd7c6 Be2d3 pd6d5 Pe4e5 pd5d4 Be3d4 qd8d4 Pe5f6 be7b4 Pf6g7 qd4g7"
    " Nd2f3 bb4c3 Pb2c3 bc6d5 Qd1e2 rc8c3 Ra1e1 na5c6 Qe2d2 kg8h8 Re1e3 nc6b4"
    " Nf3e5 nb4d3 Pc2d3 rf8c8 Re3g3 rc3c2 Qd2b4 rc2g2 Ne5f7 kh8g8 Nf7h6 kg8h8"
    " Nh6f7 kh8g8 Nf7h6"
).split()


def _games(text):
    out = []
    errors = []
    for item in parse_pgn(text):
        (out if isinstance(item, GameRecord) else errors).append(item)
    return out, errors


def test_reference_game_normalizes_to_frozen_tokens():
    games, errors = _games(NAJDORF_PGN)
    assert not errors and len(games) == 1
    game = games[0]
    assert game.result == DRAW
    line = game_to_store_line(game)
    result, tokens = line.split("\t")
    assert result == "1/2-1/2"
    assert tokens.split() == NAJDORF_TOKENS


def test_headers_are_preserved_in_order():
    games, _ = _games(NAJDORF_PGN)
    names = [name for name, _ in games[0].headers]
    assert names == ["Event", "White", "Black", "Result"]
    assert games[0].header("Event") == "Candidates"
    assert games[0].header("Site", "?") == "?"


def test_comments_variations_and_nags_are_ignored():
    annotated = """\
[Result "*"]

1. e4 {best by test} e5 (1... c5 2. Nf3 {the open Sicilian}) 2. Nf3 $1 Nc6
3. Bb5!? a6 ; lopez
4. Ba4 *
"""
    games, errors = _games(annotated)
    assert not errors and len(games) == 1
    plain, _ = _games('[Result "*"]\n\n1. e4 e5 2. Nf3 Nc6 3. Bb5 a6 4. Ba4 *')
    assert games[0].moves == plain[0].moves


def test_nested_variations_are_skipped():
    text = '[Result "*"]\n\n1. d4 (1. e4 e5 (1... c5 (1... e6)) 2. Nf3) d5 *'
    games, errors = _games(text)
    assert not errors
    assert len(games[0].moves) == 2


def test_illegal_move_skips_only_that_game():
    bad_middle = NAJDORF_PGN + """
[Event "broken"]
[Result "1-0"]

1. e4 e5 2. Nf6 Nc6 1-0

[Event "fine"]
[Result "0-1"]

1. d4 d5 0-1
"""
    games, errors = _games(bad_middle)
    assert len(games) == 2
    assert [g.result for g in games] == ["1/2-1/2", "0-1"]
    assert len(errors) == 1
    err = errors[0]
    assert isinstance(err, GameError)
    assert err.game_index == 2
    assert "Nf6" in str(err)
    # the offset points at the failing game's first line
    assert bad_middle[err.offset:].startswith('[Event "broken"]')


def test_error_offset_is_the_game_start():
    text = '[Result "*"]\n\n1. e4 Zz9 *'
    games, errors = _games(text)
    assert not games and len(errors) == 1
    assert errors[0].offset == 0
    assert "Zz9" in str(errors[0])


def test_movetext_terminator_overrides_header_result():
    games, errors = _games('[Result "1-0"]\n\n1. e4 e5 0-1')
    assert not errors
    assert games[0].result == "0-1"
    # a bare "*" terminator defers to a decisive header
    games, _ = _games('[Result "1-0"]\n\n1. e4 e5 *')
    assert games[0].result == "1-0"


def test_movetext_result_used_when_no_header():
    games, errors = _games("1. e4 e5 1-0")
    assert not errors
    assert games[0].result == "1-0"


def test_empty_games_counted_not_yielded():
    reader = parse_pgn('[Event "a"]\n\n*\n\n[Event "b"]\n\n1. e4 *\n')
    games = [g for g in reader if isinstance(g, GameRecord)]
    assert len(games) == 1
    assert reader.empty_skipped == 1


def test_bytes_and_str_inputs_agree():
    from_str, _ = _games(NAJDORF_PGN)
    from_bytes, _ = _games(NAJDORF_PGN.encode())
    assert from_str[0].moves == from_bytes[0].moves


def test_long_algebraic_movetext_is_accepted():
    text = '[Result "*"]\n\n1. Pe2e4 pe7e5 2. Ng1f3 *'
    games, errors = _games(text)
    assert not errors
    assert [m.uci() for m in games[0].moves] == ["e2e4", "e7e5", "g1f3"]


def test_write_pgn_round_trip():
    games, _ = _games(NAJDORF_PGN)
    buffer = io.StringIO()
    write_pgn(games[0], buffer)
    again, errors = _games(buffer.getvalue())
    assert not errors
    assert again[0].moves == games[0].moves
    assert again[0].result == games[0].result
    assert again[0].headers == games[0].headers


def test_store_round_trip(tmp_path):
    games, _ = _games(NAJDORF_PGN)
    path = tmp_path / "store.txt"
    assert write_store(games, path) == 1
    stored = list(read_store(path))
    assert stored == [StoreGame(0, "1/2-1/2", tuple(NAJDORF_TOKENS))]


def test_move_to_long_promotion_uses_piece_case():
    board = initial_board()
    games, _ = _games('[Result "*"]\n\n1. e4 d5 2. exd5 c6 3. dxc6 Qd7 4. cxb7 Qd8 5. bxa8=Q *')
    moves = games[0].moves
    for move in moves[:-1]:
        board = board.apply(move)
    assert move_to_long(board, moves[-1]) == "Pb7a8Q"
