"""SAN and long-algebraic move text, both directions.

parse_san resolves standard algebraic notation ("Nf3", "exd5", "O-O")
against a position.  parse_long resolves the explicit piece+origin+
destination form ("Pe2e4", "ng8f6", "Pe7e8Q") whose letter case encodes
the piece color.  san_of renders a legal move back to minimal SAN.
"""

from __future__ import annotations

import re

from ..errors import AmbiguousSan, MalformedSan, NoLegalMatch
from .board import (
    BETWEEN,
    BISHOP,
    CODE_OF_LETTER,
    KIND_LETTERS,
    KING,
    KING_ATTACKS,
    KNIGHT,
    KNIGHT_ATTACKS,
    PAWN,
    RAYS,
    ROOK,
    Board,
    Move,
    _pawn_src,
    file_of,
    parse_square,
    rank_of,
    square_name,
)

_SAN_RE = re.compile(
    r"^([KQRBN])?([a-h])?([1-8])?(x)?([a-h][1-8])(?:=([QRBN]))?([+#])?[!?]{0,2}$"
)
_CASTLE_RE = re.compile(r"^([O0])-\1(-\1)?([+#])?[!?]{0,2}$")
LONG_RE = re.compile(r"^([PNBRQKpnbrqk])([a-h][1-8])([a-h][1-8])([QRBNqrbn])?$")


def _ray_candidates(board: Board, dest: int, code: int, dirs: range) -> list:
    """Origin squares of sliders with code `code` that see `dest`."""
    sqs = board.squares
    out = []
    rays = RAYS[dest]
    for di in dirs:
        for s in rays[di]:
            c = sqs[s]
            if c == 0:
                continue
            if c == code:
                out.append(s)
            break
    return out


def _candidates(board: Board, kind: int, dest: int) -> list:
    """Origin squares of side-to-move pieces of `kind` that reach `dest`.

    Pawns are handled separately; this covers N, B, R, Q, K.
    """
    code = kind * board.stm
    sqs = board.squares
    if kind == KNIGHT:
        return [s for s in KNIGHT_ATTACKS[dest] if sqs[s] == code]
    if kind == KING:
        return [s for s in KING_ATTACKS[dest] if sqs[s] == code]
    if kind == ROOK:
        return _ray_candidates(board, dest, code, range(0, 4))
    if kind == BISHOP:
        return _ray_candidates(board, dest, code, range(4, 8))
    return _ray_candidates(board, dest, code, range(0, 8))


def _pawn_origins(board: Board, dest: int, capture: bool) -> list:
    sqs = board.squares
    us = board.stm
    pawn = us  # pawn code is 1 * color sign
    if capture:
        return [s for s in _pawn_src(us)[dest] if sqs[s] == pawn]
    back = dest - 8 * us
    if not 0 <= back <= 63:
        return []
    if sqs[back] == pawn:
        return [back]
    if sqs[back] == 0:
        start = back - 8 * us
        if 0 <= start <= 63 and rank_of(start) in (1, 6) and sqs[start] == pawn:
            return [start]
    return []


def _filter_legal(board: Board, origins, dest: int, promotion, capture: bool, is_ep: bool) -> list:
    """Keep origins whose move leaves the king safe.

    Geometry, occupancy, and capture semantics are already settled by
    the candidate scans, so one full simulation per origin decides
    legality (pins, checks, and en-passant discoveries included).
    """
    moves = []
    for frm in origins:
        if board._king_safe_after(frm, dest, is_ep):
            moves.append(Move(frm, dest, promotion, capture, is_ep))
    return moves


def parse_san(board: Board, text: str) -> Move:
    """The unique legal move written as `text`, in SAN."""
    castle = _CASTLE_RE.match(text)
    if castle:
        side = "Q" if castle.group(2) else "K"
        rank_base = 0 if board.stm > 0 else 56
        dest = rank_base + (6 if side == "K" else 2)
        m = Move(rank_base + 4, dest, castle=side)
        if m in board.legal_moves(from_sq=rank_base + 4):
            return m
        raise NoLegalMatch(f"castling {text!r} is not legal here")

    match = _SAN_RE.match(text)
    if match is None:
        raise MalformedSan(f"not a SAN move: {text!r}")
    letter, dis_file, dis_rank, x, dest_text, promo, _suffix = match.groups()
    dest = parse_square(dest_text)
    capture = x is not None
    us = board.stm

    if letter is None:
        # pawn move; a bare file disambiguator like "ed5" is nonstandard
        if dis_rank is not None or (dis_file is not None and not capture):
            raise MalformedSan(f"not a SAN move: {text!r}")
        promo_rank = 7 if us > 0 else 0
        if (rank_of(dest) == promo_rank) != (promo is not None):
            raise MalformedSan(f"promotion piece required or misplaced in {text!r}")
        is_ep = capture and dest == board.ep
        origins = _pawn_origins(board, dest, capture)
        if capture and dis_file is None:
            raise MalformedSan(f"pawn capture needs its origin file: {text!r}")
        if dis_file is not None:
            origins = [s for s in origins if file_of(s) == ord(dis_file) - 97]
        if capture and not is_ep and board.squares[dest] * us >= 0:
            raise NoLegalMatch(f"{text!r} captures nothing")
        if not capture and board.squares[dest] != 0:
            raise NoLegalMatch(f"{text!r} pushes onto an occupied square")
        moves = _filter_legal(board, origins, dest, promo, capture, is_ep)
    else:
        if promo is not None:
            raise MalformedSan(f"only pawns promote: {text!r}")
        kind = CODE_OF_LETTER[letter]
        if capture and board.squares[dest] * us >= 0:
            raise NoLegalMatch(f"{text!r} captures nothing")
        if not capture and board.squares[dest] != 0:
            raise NoLegalMatch(f"{text!r} moves onto an occupied square without 'x'")
        origins = _candidates(board, kind, dest)
        if dis_file is not None:
            origins = [s for s in origins if file_of(s) == ord(dis_file) - 97]
        if dis_rank is not None:
            origins = [s for s in origins if rank_of(s) == int(dis_rank) - 1]
        moves = _filter_legal(board, origins, dest, None, capture, False)

    if not moves:
        raise NoLegalMatch(f"no legal move matches {text!r}")
    if len(moves) > 1:
        raise AmbiguousSan(f"{text!r} matches {len(moves)} moves")
    return moves[0]


def _path_clear(board: Board, frm: int, dest: int) -> bool:
    for s in BETWEEN[frm * 64 + dest]:
        if board.squares[s] != 0:
            return False
    return True


def _long_geometry_ok(board: Board, kind: int, frm: int, dest: int) -> bool:
    """Piece movement shape plus clear path; occupancy of `dest` is the
    caller's business."""
    if kind == KNIGHT:
        return dest in KNIGHT_ATTACKS[frm]
    if kind == KING:
        return dest in KING_ATTACKS[frm]
    df = file_of(dest) - file_of(frm)
    dr = rank_of(dest) - rank_of(frm)
    straight = (df == 0) != (dr == 0)
    diagonal = df != 0 and abs(df) == abs(dr)
    if kind == ROOK:
        ok = straight
    elif kind == BISHOP:
        ok = diagonal
    else:  # queen
        ok = straight or diagonal
    return ok and _path_clear(board, frm, dest)


def parse_long(board: Board, text: str) -> Move:
    """Resolve piece+origin+destination text like "Pe2e4" or "ng8f6"."""
    match = LONG_RE.match(text)
    if match is None:
        raise MalformedSan(f"not a long-algebraic move: {text!r}")
    letter, from_text, to_text, promo = match.groups()
    us = 1 if letter.isupper() else -1
    if us != board.stm:
        raise NoLegalMatch(f"{text!r} is a move by the wrong color")
    frm = parse_square(from_text)
    dest = parse_square(to_text)
    kind = CODE_OF_LETTER[letter.upper()]
    sqs = board.squares
    if sqs[frm] != kind * us:
        raise NoLegalMatch(f"no {letter} on {from_text} for {text!r}")
    last_rank = 7 if us > 0 else 0
    if promo is not None:
        if promo.isupper() != letter.isupper():
            raise MalformedSan(f"promotion letter case mismatch in {text!r}")
        if kind != PAWN or rank_of(dest) != last_rank:
            raise NoLegalMatch(f"{text!r} cannot promote")
        promo = promo.upper()
    elif kind == PAWN and rank_of(dest) == last_rank:
        raise NoLegalMatch(f"{text!r} needs a promotion letter")
    if kind == KING and rank_of(dest) == rank_of(frm) and abs(file_of(dest) - file_of(frm)) == 2:
        m = Move(frm, dest, castle="K" if file_of(dest) == 6 else "Q")
        if m in board.legal_moves(from_sq=frm):
            return m
        raise NoLegalMatch(f"{text!r} is not legal in this position")
    if sqs[dest] * us > 0:
        raise NoLegalMatch(f"{text!r} lands on its own piece")
    is_ep = False
    if kind == PAWN:
        forward = (dest - frm) * us
        df = abs(file_of(dest) - file_of(frm))
        if df == 0:
            capture = False
            ok = sqs[dest] == 0 and (
                forward == 8
                or (forward == 16 and rank_of(frm) == (1 if us > 0 else 6)
                    and sqs[(frm + dest) // 2] == 0)
            )
        elif df == 1 and forward in (7, 9):
            if sqs[dest] * us < 0:
                ok, capture = True, True
            elif board.ep >= 0 and dest == board.ep:
                ok = capture = is_ep = True
            else:
                ok = False
        else:
            ok = False
        if not ok:
            raise NoLegalMatch(f"{text!r} is not a pawn move available here")
    else:
        if not _long_geometry_ok(board, kind, frm, dest):
            raise NoLegalMatch(f"{text!r} is not reachable")
        capture = sqs[dest] != 0
    if not board._king_safe_after(frm, dest, is_ep):
        raise NoLegalMatch(f"{text!r} leaves the king in check")
    return Move(frm, dest, promo, capture, is_ep)


def is_long_algebraic(text: str) -> bool:
    return LONG_RE.match(text) is not None


def parse_move_text(board: Board, text: str) -> Move:
    """Accept SAN or long-algebraic text, picking the parser by shape.

    Full SAN disambiguation ("Qd1d5") and the long form of the same
    move coincide in both spelling and meaning, so trying the long
    form first never changes the result.
    """
    if LONG_RE.match(text):
        return parse_long(board, text)
    return parse_san(board, text)


def san_of(board: Board, move: Move) -> str:
    """Minimal SAN for a move that is legal on `board`."""
    legal = board.legal_moves()
    if move not in legal:
        raise NoLegalMatch(f"{move!r} is not legal in {board.fen()!r}")
    if move.castle:
        text = "O-O" if move.castle == "K" else "O-O-O"
    else:
        code = board.squares[move.from_sq]
        kind = abs(code)
        dest = square_name(move.to_sq)
        if kind == PAWN:
            text = ""
            if move.is_capture:
                text += square_name(move.from_sq)[0] + "x"
            text += dest
            if move.promotion:
                text += "=" + move.promotion
        else:
            others = [
                m.from_sq
                for m in legal
                if m.to_sq == move.to_sq and m.from_sq != move.from_sq
                and board.squares[m.from_sq] == code
            ]
            dis = ""
            if others:
                same_file = any(file_of(s) == file_of(move.from_sq) for s in others)
                same_rank = any(rank_of(s) == rank_of(move.from_sq) for s in others)
                if not same_file:
                    dis = square_name(move.from_sq)[0]
                elif not same_rank:
                    dis = square_name(move.from_sq)[1]
                else:
                    dis = square_name(move.from_sq)
            text = KIND_LETTERS[kind] + dis + ("x" if move.is_capture else "") + dest
    after = board.apply(move)
    if after.in_check():
        text += "#" if not after.legal_moves() else "+"
    return text
