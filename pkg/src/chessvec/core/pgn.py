"""PGN ingestion and the normalized game store.

parse_pgn walks a byte or text stream game by game: tag-pair section,
then movetext with comments, nested variations, and NAGs skipped.  Each
game is replay-validated as its moves are resolved, so a yielded
GameRecord is always legal.  A bad game becomes a GameError carrying
the byte offset where the game started, and parsing continues.

The normalized store holds one game per line: the result, a tab, then
the game's moves as space-separated long-algebraic tokens ("Pe2e4
pc7c5 ...").  UTF-8, LF line endings.
"""

from __future__ import annotations

import io
import re
from typing import Iterator, List, NamedTuple, Optional, Tuple, Union

from ..errors import ChessvecError, GameError
from .board import SQUARE_NAMES, Board, Move
from .san import parse_move_text, san_of

WHITE_WIN = "1-0"
BLACK_WIN = "0-1"
DRAW = "1/2-1/2"
UNKNOWN = "*"
RESULTS = (WHITE_WIN, BLACK_WIN, DRAW, UNKNOWN)

_TAG_RE = re.compile(r'^\[(\w+)\s+"(.*)"\]\s*$')
_NAG_RE = re.compile(r"^\$\d+$")
_MOVE_NUMBER_RE = re.compile(r"^\d+\.*$")


class GameRecord(NamedTuple):
    headers: Tuple[Tuple[str, str], ...]
    moves: Tuple[Move, ...]
    result: str

    def header(self, name: str, default: Optional[str] = None) -> Optional[str]:
        for key, value in self.headers:
            if key == name:
                return value
        return default


def _strip_comments_and_variations(text: str) -> str:
    """Drop {...} comments, (...) variations (nested), and ; line comments."""
    out = []
    depth = 0
    in_brace = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if in_brace:
            if ch == "}":
                in_brace = False
        elif ch == "{":
            in_brace = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            if depth > 0:
                depth -= 1
        elif ch == ";" and depth == 0:
            while i < n and text[i] != "\n":
                i += 1
            continue
        elif depth == 0:
            out.append(ch)
        i += 1
    return "".join(out)


class PgnReader:
    """Iterate GameRecord / GameError items over a PGN stream.

    Exposes `empty_skipped`, the count of games that had headers but no
    moves; those are silently dropped rather than yielded.
    """

    def __init__(self, stream):
        if isinstance(stream, (str, bytes)):
            stream = io.BytesIO(stream.encode() if isinstance(stream, str) else stream)
        self._stream = stream
        self.empty_skipped = 0
        self._game_index = 0

    def __iter__(self) -> Iterator[Union[GameRecord, GameError]]:
        offset = 0
        game_offset = None
        headers: List[Tuple[str, str]] = []
        movetext: List[str] = []
        in_moves = False

        def finish():
            nonlocal headers, movetext, in_moves, game_offset
            item = None
            if headers or movetext:
                item = self._finish_game(headers, movetext, game_offset or 0)
            headers, movetext, in_moves, game_offset = [], [], False, None
            return item

        for raw in self._stream:
            line_offset = offset
            offset += len(raw)
            if isinstance(raw, bytes):
                line = raw.decode("utf-8", errors="replace")
            else:
                line = raw
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("["):
                tag = _TAG_RE.match(stripped)
                if tag and in_moves:
                    # a new game begins
                    item = finish()
                    if item is not None:
                        yield item
                if tag:
                    if game_offset is None:
                        game_offset = line_offset
                    headers.append((tag.group(1), tag.group(2)))
                    continue
                # not a tag pair: treat as movetext (could be "[%clk]" junk inside moves)
            if game_offset is None:
                game_offset = line_offset
            in_moves = True
            movetext.append(line)
            if stripped.endswith(RESULTS) and not stripped.startswith("["):
                joined = "".join(movetext)
                if joined.count("{") <= joined.count("}"):  # not inside a comment
                    item = finish()
                    if item is not None:
                        yield item
        item = finish()
        if item is not None:
            yield item

    def _finish_game(self, headers, movetext, offset) -> Union[GameRecord, GameError, None]:
        self._game_index += 1
        index = self._game_index
        text = _strip_comments_and_variations("\n".join(movetext))
        tokens = text.split()
        result = None
        move_texts = []
        for tok in tokens:
            if tok in RESULTS:
                result = tok
                break
            if _MOVE_NUMBER_RE.match(tok) or _NAG_RE.match(tok):
                continue
            # glued move numbers like "1.e4" or "3...Nf6"
            m = re.match(r"^(\d+)\.+(.*)$", tok)
            if m:
                if m.group(2):
                    move_texts.append(m.group(2))
                continue
            move_texts.append(tok)
        if result is None:
            result = UNKNOWN
        if not move_texts:
            self.empty_skipped += 1
            return None
        board = Board.initial()
        moves = []
        try:
            for ply, move_text in enumerate(move_texts, start=1):
                move = parse_move_text(board, move_text)
                board = board.apply(move)
                moves.append(move)
        except ChessvecError as exc:
            return GameError(f"ply {ply} {move_text!r}: {exc}", offset=offset, game_index=index)
        header_result = dict(headers).get("Result")
        if header_result in RESULTS and result == UNKNOWN:
            result = header_result
        return GameRecord(tuple(headers), tuple(moves), result)


def parse_pgn(stream) -> PgnReader:
    """Reader over `stream` (file object, bytes, or str)."""
    return PgnReader(stream)


def write_pgn(game: GameRecord, out) -> None:
    """Render one game back to PGN with SAN movetext."""
    names = [name for name, _ in game.headers]
    for name, value in game.headers:
        out.write(f'[{name} "{value}"]\n')
    if "Result" not in names:
        out.write(f'[Result "{game.result}"]\n')
    out.write("\n")
    board = Board.initial()
    parts = []
    for i, move in enumerate(game.moves):
        if i % 2 == 0:
            parts.append(f"{i // 2 + 1}.")
        parts.append(san_of(board, move))
        board = board.apply(move)
    parts.append(game.result)
    line = []
    length = 0
    for part in parts:
        if length + len(part) + 1 > 80:
            out.write(" ".join(line) + "\n")
            line, length = [], 0
        line.append(part)
        length += len(part) + 1
    if line:
        out.write(" ".join(line) + "\n")
    out.write("\n")


# -- normalized game store ----------------------------------------------


def move_to_long(board: Board, move: Move) -> str:
    """Long-algebraic token for a move: piece letter, origin, destination."""
    piece = board.piece_at(move.from_sq)
    text = piece.letter + SQUARE_NAMES[move.from_sq] + SQUARE_NAMES[move.to_sq]
    if move.promotion:
        text += move.promotion if piece.color == "white" else move.promotion.lower()
    return text


def game_to_store_line(game: GameRecord) -> str:
    board = Board.initial()
    tokens = []
    for move in game.moves:
        tokens.append(move_to_long(board, move))
        board = board.apply(move)
    return game.result + "\t" + " ".join(tokens)


def write_store(games, path) -> int:
    """Write GameRecords to a store file; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for game in games:
            out.write(game_to_store_line(game) + "\n")
            count += 1
    return count


class StoreGame(NamedTuple):
    index: int
    result: str
    tokens: Tuple[str, ...]


def read_store(path) -> Iterator[StoreGame]:
    """Yield (index, result, move tokens) per line of a store file."""
    with open(path, "r", encoding="utf-8") as handle:
        for index, line in enumerate(handle):
            line = line.rstrip("\n")
            if not line:
                continue
            result, _, moves = line.partition("\t")
            if result not in RESULTS:
                raise GameError(f"bad result field {result!r}", game_index=index)
            yield StoreGame(index, result, tuple(moves.split()))
