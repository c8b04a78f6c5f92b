"""The move/position token language.

Move tokens are piece letter + origin + destination ("Pe2e4"), with the
letter case encoding color.  Optional affixes: a leading "->" marking a
move inside a position sentence, a promotion letter in the mover's case
("Pe7e8Q"), and a part-of-speech suffix "_CAP" (the move captures,
en passant included) or "_N" (it does not).  Position tokens are piece
letter + occupied square ("ra8").  Lemma tokens drop the origin square
from a move token ("Pe4").
"""

from __future__ import annotations

import re
from typing import NamedTuple, Optional

from .core.board import (
    BLACK,
    WHITE,
    Piece,
    Step,
    SQUARE_NAMES,
    parse_square,
)
from .errors import MalformedToken

_TOKEN_RE = re.compile(
    r"^(->)?([PNBRQKpnbrqk])([a-h][1-8])([a-h][1-8])?([QRBNqrbn])?(_CAP|_N)?$"
)

MOVE, POSITION, LEMMA = "move", "position", "lemma"


class ParsedToken(NamedTuple):
    kind: str  # move | position | lemma
    piece: Piece
    origin: Optional[int]  # None for position and lemma tokens
    dest: int  # destination square, or the occupied square
    arrow: bool
    pos_tag: Optional[str]  # "CAP" | "N" | None
    promotion: Optional[str]  # uppercase letter


def encode_move(step: Step, arrow: bool = False, pos_tags: bool = False, lemma: bool = False) -> str:
    """Token for one replay step."""
    move = step.move
    letter = step.moved_piece.letter
    white = step.moved_piece.color == WHITE
    if lemma:
        text = letter + SQUARE_NAMES[move.to_sq]
    else:
        text = letter + SQUARE_NAMES[move.from_sq] + SQUARE_NAMES[move.to_sq]
    if move.promotion:
        text += move.promotion if white else move.promotion.lower()
    if pos_tags:
        text += "_CAP" if step.captured is not None else "_N"
    if arrow:
        text = "->" + text
    return text


def encode_occupancy(board) -> list:
    """Position tokens: all Black pieces, then all White, each color
    scanned rank 8 down to rank 1 and file a to h within a rank."""
    squares = board.squares
    black, white = [], []
    for rank in range(7, -1, -1):
        base = rank * 8
        for sq in range(base, base + 8):
            code = squares[sq]
            if code == 0:
                continue
            if code < 0:
                black.append(_POSITION_TOKENS[code + 6][sq])
            else:
                white.append(_POSITION_TOKENS[code + 6][sq])
    black.extend(white)
    return black


# position-token string cache indexed by [piece code + 6][square]
_LETTERS = (".PNBRQK", ".pnbrqk")
_POSITION_TOKENS = tuple(
    tuple(
        (_LETTERS[code < 0][abs(code)] + SQUARE_NAMES[sq]) if code else ""
        for sq in range(64)
    )
    for code in range(-6, 7)
)


def parse_token(text: str) -> ParsedToken:
    """Structured view of any token in the grammar."""
    match = _TOKEN_RE.match(text)
    if match is None:
        raise MalformedToken(f"not a token: {text!r}")
    arrow, letter, first_sq, second_sq, promo, pos_tag = match.groups()
    white = letter.isupper()
    piece = Piece(WHITE if white else BLACK, letter.upper())
    if promo is not None:
        if promo.isupper() != white:
            raise MalformedToken(f"promotion letter case mismatch: {text!r}")
        if piece.kind != "P":
            raise MalformedToken(f"only pawn moves promote: {text!r}")
        promo = promo.upper()
    if second_sq is not None:
        if first_sq == second_sq:
            raise MalformedToken(f"origin equals destination: {text!r}")
        if promo is not None and second_sq[1] != ("8" if white else "1"):
            raise MalformedToken(f"promotion square on the wrong rank: {text!r}")
        return ParsedToken(
            MOVE, piece, parse_square(first_sq), parse_square(second_sq),
            arrow is not None, pos_tag[1:] if pos_tag else None, promo,
        )
    kind = LEMMA if (arrow or promo or pos_tag) else POSITION
    if promo is not None and first_sq[1] != ("8" if white else "1"):
        raise MalformedToken(f"promotion square on the wrong rank: {text!r}")
    return ParsedToken(
        kind, piece, None, parse_square(first_sq),
        arrow is not None, pos_tag[1:] if pos_tag else None, promo,
    )


def lemmatize(token: str) -> str:
    """Drop the origin square from a plain move token."""
    parsed = parse_token(token)
    if parsed.kind != MOVE:
        raise MalformedToken(f"not a move token: {token!r}")
    if parsed.arrow or parsed.pos_tag:
        raise MalformedToken(f"lemma input must carry no affixes: {token!r}")
    white = parsed.piece.color == WHITE
    text = parsed.piece.letter + SQUARE_NAMES[parsed.dest]
    if parsed.promotion:
        text += parsed.promotion if white else parsed.promotion.lower()
    return text
