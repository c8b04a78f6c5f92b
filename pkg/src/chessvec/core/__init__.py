"""Chess rules engine: board, move generation, notation, PGN, replay."""

from .board import (
    BLACK,
    WHITE,
    Board,
    Move,
    Piece,
    Step,
    apply_move,
    file_of,
    initial_board,
    legal_moves,
    parse_square,
    perft,
    rank_of,
    square_name,
)
from .pgn import (
    DRAW,
    RESULTS,
    UNKNOWN,
    WHITE_WIN,
    BLACK_WIN,
    GameRecord,
    PgnReader,
    StoreGame,
    game_to_store_line,
    move_to_long,
    parse_pgn,
    read_store,
    write_pgn,
    write_store,
)
from .replay import replay, replay_tokens
from .san import parse_long, parse_move_text, parse_san, san_of

__all__ = [
    "BLACK",
    "WHITE",
    "Board",
    "Move",
    "Piece",
    "Step",
    "apply_move",
    "file_of",
    "initial_board",
    "legal_moves",
    "parse_square",
    "perft",
    "rank_of",
    "square_name",
    "DRAW",
    "RESULTS",
    "UNKNOWN",
    "WHITE_WIN",
    "BLACK_WIN",
    "GameRecord",
    "PgnReader",
    "StoreGame",
    "game_to_store_line",
    "move_to_long",
    "parse_pgn",
    "read_store",
    "write_pgn",
    "write_store",
    "replay",
    "replay_tokens",
    "parse_long",
    "parse_move_text",
    "parse_san",
    "san_of",
]
