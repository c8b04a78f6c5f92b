"""Board state and legal move generation for standard chess.

Squares are integers 0..63 (a1 = 0, b1 = 1, ..., h8 = 63).  Piece codes
are signed integers: pawn 1, knight 2, bishop 3, rook 4, queen 5,
king 6, negated for Black.  Boards are treated as immutable: applying a
move returns a new Board.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

from ..errors import IllegalMove

WHITE = "white"
BLACK = "black"

PAWN, KNIGHT, BISHOP, ROOK, QUEEN, KING = 1, 2, 3, 4, 5, 6
KIND_LETTERS = ".PNBRQK"
CODE_OF_LETTER = {letter: code for code, letter in enumerate(KIND_LETTERS) if code}

FILES = "abcdefgh"
SQUARE_NAMES = tuple(FILES[sq & 7] + str((sq >> 3) + 1) for sq in range(64))

# castling-rights bits
WK_SIDE, WQ_SIDE, BK_SIDE, BQ_SIDE = 1, 2, 4, 8
CASTLE_LETTERS = {WK_SIDE: "K", WQ_SIDE: "Q", BK_SIDE: "k", BQ_SIDE: "q"}


def parse_square(text: str) -> int:
    if len(text) != 2 or text[0] not in FILES or text[1] not in "12345678":
        raise ValueError(f"bad square name: {text!r}")
    return (int(text[1]) - 1) * 8 + FILES.index(text[0])


def square_name(sq: int) -> str:
    return SQUARE_NAMES[sq]


def file_of(sq: int) -> int:
    return sq & 7


def rank_of(sq: int) -> int:
    return sq >> 3


class Piece(NamedTuple):
    color: str
    kind: str  # one of "PNBRQK"

    @property
    def letter(self) -> str:
        return self.kind if self.color == WHITE else self.kind.lower()


# Piece lookup by signed code, index = code + 6.
PIECE_BY_CODE = tuple(
    Piece(BLACK, KIND_LETTERS[-c]) if c < 0 else (Piece(WHITE, KIND_LETTERS[c]) if c > 0 else None)
    for c in range(-6, 7)
)


def piece_from_code(code: int) -> Optional[Piece]:
    return PIECE_BY_CODE[code + 6]


class Move(NamedTuple):
    from_sq: int
    to_sq: int
    promotion: Optional[str] = None  # uppercase letter in "NBRQ"
    is_capture: bool = False
    is_en_passant: bool = False
    castle: Optional[str] = None  # "K" or "Q"

    def uci(self) -> str:
        promo = self.promotion.lower() if self.promotion else ""
        return SQUARE_NAMES[self.from_sq] + SQUARE_NAMES[self.to_sq] + promo

    def __repr__(self):
        return f"Move({self.uci()})"


class Step(NamedTuple):
    ply_index: int  # 1-based
    fullmove_number: int
    board_before: "Board"
    move: Move
    moved_piece: Piece
    captured: Optional[Piece]


def _build_tables():
    knight, king, rays, pawn_src, pawn_tgt = [], [], [], ({}, {}), ({}, {})
    between = [()] * (64 * 64)
    knight_d = ((1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2))
    king_d = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))
    # ray order: rook directions first, bishop directions last
    ray_d = ((0, 1), (0, -1), (1, 0), (-1, 0), (1, 1), (1, -1), (-1, 1), (-1, -1))
    for sq in range(64):
        f, r = sq & 7, sq >> 3
        ok = lambda ff, rr: 0 <= ff <= 7 and 0 <= rr <= 7
        knight.append(tuple((rr * 8 + ff) for ff, rr in ((f + df, r + dr) for df, dr in knight_d) if ok(ff, rr)))
        king.append(tuple((rr * 8 + ff) for ff, rr in ((f + df, r + dr) for df, dr in king_d) if ok(ff, rr)))
        sq_rays = []
        for df, dr in ray_d:
            ray, seen = [], []
            ff, rr = f + df, r + dr
            while ok(ff, rr):
                tgt = rr * 8 + ff
                between[sq * 64 + tgt] = tuple(seen)
                ray.append(tgt)
                seen.append(tgt)
                ff, rr = ff + df, rr + dr
            sq_rays.append(tuple(ray))
        rays.append(tuple(sq_rays))
        for sign, idx, dr in ((1, 0, -1), (-1, 1, 1)):
            # pawn_src[idx][sq]: squares a pawn of that color attacks sq from
            srcs = tuple((rr * 8 + ff) for ff, rr in ((f - 1, r + dr), (f + 1, r + dr)) if ok(ff, rr))
            pawn_src[idx][sq] = srcs
            tgts = tuple((rr * 8 + ff) for ff, rr in ((f - 1, r - dr), (f + 1, r - dr)) if ok(ff, rr))
            pawn_tgt[idx][sq] = tgts
    return tuple(knight), tuple(king), tuple(rays), tuple(between), pawn_src, pawn_tgt


KNIGHT_ATTACKS, KING_ATTACKS, RAYS, BETWEEN, _PAWN_SRC, _PAWN_TGT = _build_tables()


def _pawn_src(color_sign: int):
    return _PAWN_SRC[0] if color_sign > 0 else _PAWN_SRC[1]


def _pawn_tgt(color_sign: int):
    return _PAWN_TGT[0] if color_sign > 0 else _PAWN_TGT[1]


# bits that survive a move touching each square
RIGHTS_MASK = [15] * 64
RIGHTS_MASK[parse_square("a1")] = 15 & ~WQ_SIDE
RIGHTS_MASK[parse_square("h1")] = 15 & ~WK_SIDE
RIGHTS_MASK[parse_square("e1")] = 15 & ~(WK_SIDE | WQ_SIDE)
RIGHTS_MASK[parse_square("a8")] = 15 & ~BQ_SIDE
RIGHTS_MASK[parse_square("h8")] = 15 & ~BK_SIDE
RIGHTS_MASK[parse_square("e8")] = 15 & ~(BK_SIDE | BQ_SIDE)
RIGHTS_MASK = tuple(RIGHTS_MASK)

_PROMO_KINDS = ("Q", "R", "B", "N")

_START = (
    [ROOK, KNIGHT, BISHOP, QUEEN, KING, BISHOP, KNIGHT, ROOK]
    + [PAWN] * 8
    + [0] * 32
    + [-PAWN] * 8
    + [-ROOK, -KNIGHT, -BISHOP, -QUEEN, -KING, -BISHOP, -KNIGHT, -ROOK]
)


class Board:
    __slots__ = ("squares", "stm", "castling", "ep", "halfmove_clock", "fullmove_number",
                 "wk", "bk", "_ci")

    def __init__(self, squares, stm=1, castling=15, ep=-1, halfmove_clock=0, fullmove_number=1):
        if len(squares) != 64:
            raise ValueError("board needs exactly 64 squares")
        self._ci = None
        self.squares = list(squares)
        self.stm = stm
        self.castling = castling
        self.ep = ep
        self.halfmove_clock = halfmove_clock
        self.fullmove_number = fullmove_number
        try:
            self.wk = self.squares.index(KING)
            self.bk = self.squares.index(-KING)
        except ValueError:
            raise ValueError("board must have one king per color") from None
        if self.squares.count(KING) != 1 or self.squares.count(-KING) != 1:
            raise ValueError("board must have one king per color")

    @classmethod
    def initial(cls) -> "Board":
        return cls(_START)

    @classmethod
    def from_fen(cls, fen: str) -> "Board":
        parts = fen.split()
        if len(parts) < 4:
            raise ValueError(f"FEN needs at least 4 fields: {fen!r}")
        placement, turn, castling, ep = parts[:4]
        halfmove = int(parts[4]) if len(parts) > 4 else 0
        fullmove = int(parts[5]) if len(parts) > 5 else 1
        rows = placement.split("/")
        if len(rows) != 8:
            raise ValueError("FEN placement needs 8 ranks")
        squares = [0] * 64
        for row_idx, row in enumerate(rows):
            rank = 7 - row_idx
            f = 0
            for ch in row:
                if ch.isdigit():
                    f += int(ch)
                elif ch.upper() in CODE_OF_LETTER:
                    if f > 7:
                        raise ValueError(f"rank overflow in FEN row {row!r}")
                    sign = 1 if ch.isupper() else -1
                    squares[rank * 8 + f] = sign * CODE_OF_LETTER[ch.upper()]
                    f += 1
                else:
                    raise ValueError(f"bad FEN character {ch!r}")
            if f != 8:
                raise ValueError(f"short FEN row {row!r}")
        stm = 1 if turn == "w" else -1
        rights = 0
        if castling != "-":
            for bit, letter in CASTLE_LETTERS.items():
                if letter in castling:
                    rights |= bit
        ep_sq = -1 if ep == "-" else parse_square(ep)
        return cls(squares, stm, rights, ep_sq, halfmove, fullmove)

    def fen(self) -> str:
        rows = []
        for rank in range(7, -1, -1):
            row, empty = "", 0
            for f in range(8):
                code = self.squares[rank * 8 + f]
                if code == 0:
                    empty += 1
                    continue
                if empty:
                    row += str(empty)
                    empty = 0
                letter = KIND_LETTERS[abs(code)]
                row += letter if code > 0 else letter.lower()
            if empty:
                row += str(empty)
            rows.append(row)
        rights = "".join(CASTLE_LETTERS[b] for b in (1, 2, 4, 8) if self.castling & b) or "-"
        ep = "-" if self.ep < 0 else SQUARE_NAMES[self.ep]
        turn = "w" if self.stm > 0 else "b"
        return f"{'/'.join(rows)} {turn} {rights} {ep} {self.halfmove_clock} {self.fullmove_number}"

    def __repr__(self):
        return f"Board({self.fen()!r})"

    # -- read access ---------------------------------------------------

    @property
    def side_to_move(self) -> str:
        return WHITE if self.stm > 0 else BLACK

    @property
    def en_passant_target(self) -> Optional[int]:
        return None if self.ep < 0 else self.ep

    @property
    def castling_rights(self) -> frozenset:
        return frozenset(CASTLE_LETTERS[b] for b in (1, 2, 4, 8) if self.castling & b)

    @property
    def occupancy(self) -> dict:
        return {sq: PIECE_BY_CODE[code + 6] for sq, code in enumerate(self.squares) if code}

    def piece_at(self, sq: int) -> Optional[Piece]:
        return PIECE_BY_CODE[self.squares[sq] + 6]

    # -- attack machinery ----------------------------------------------

    def attacked(self, sq: int, by: int, ignore: int = -1) -> bool:
        """True when a piece of color sign `by` attacks `sq`.

        `ignore` marks one square to treat as empty (the moving king's
        origin, so sliders see through it).
        """
        sqs = self.squares
        knight = 2 * by
        for s in KNIGHT_ATTACKS[sq]:
            if sqs[s] == knight:
                return True
        for s in _pawn_src(by)[sq]:
            if sqs[s] == by:  # pawn code is 1 * by
                return True
        king = 6 * by
        for s in KING_ATTACKS[sq]:
            if sqs[s] == king:
                return True
        rays = RAYS[sq]
        for di in range(8):
            kinds = (ROOK, QUEEN) if di < 4 else (BISHOP, QUEEN)
            for s in rays[di]:
                code = sqs[s]
                if code == 0 or s == ignore:
                    continue
                if code * by in kinds:
                    return True
                break
        return False

    def in_check(self) -> bool:
        ksq = self.wk if self.stm > 0 else self.bk
        return self.attacked(ksq, -self.stm)

    def _check_info(self):
        """Checkers on the side-to-move king plus pin lines.

        Returns (checkers, pins) where pins maps a pinned piece's square
        to the tuple of squares it may still move to (the king-pinner
        line including the pinner).
        """
        sqs = self.squares
        us = self.stm
        ksq = self.wk if us > 0 else self.bk
        checkers = []
        pins = {}
        enemy_knight = -2 * us
        for s in KNIGHT_ATTACKS[ksq]:
            if sqs[s] == enemy_knight:
                checkers.append(s)
        enemy_pawn = -us
        for s in _pawn_src(-us)[ksq]:
            if sqs[s] == enemy_pawn:
                checkers.append(s)
        rays = RAYS[ksq]
        for di in range(8):
            kinds = (ROOK, QUEEN) if di < 4 else (BISHOP, QUEEN)
            blocker = -1
            for s in rays[di]:
                code = sqs[s]
                if code == 0:
                    continue
                if code * us > 0:
                    if blocker < 0:
                        blocker = s
                        continue
                    break
                if abs(code) in kinds:
                    if blocker < 0:
                        checkers.append(s)
                    else:
                        pins[blocker] = BETWEEN[ksq * 64 + s] + (s,)
                break
        return checkers, pins

    def _check_cache(self):
        ci = self._ci
        if ci is None:
            ci = self._ci = self._check_info()
        return ci

    def _king_safe_after(self, frm: int, to: int, is_ep: bool) -> bool:
        """Simulate frm->to and test whether our king is attacked."""
        sqs = self.squares
        us = self.stm
        saved_frm, saved_to = sqs[frm], sqs[to]
        cap_sq = -1
        if is_ep:
            cap_sq = to - 8 * us
            saved_cap = sqs[cap_sq]
            sqs[cap_sq] = 0
        sqs[to] = saved_frm
        sqs[frm] = 0
        ksq = to if abs(saved_frm) == KING else (self.wk if us > 0 else self.bk)
        safe = not self.attacked(ksq, -us)
        sqs[frm] = saved_frm
        sqs[to] = saved_to
        if cap_sq >= 0:
            sqs[cap_sq] = saved_cap
        return safe

    # -- move generation -------------------------------------------------

    def legal_moves(self, from_sq: Optional[int] = None) -> list:
        """All legal moves, or only those from one origin square."""
        sqs = self.squares
        us = self.stm
        ksq = self.wk if us > 0 else self.bk
        checkers, pins = self._check_cache()
        moves = []

        if len(checkers) < 2:
            if checkers:
                c = checkers[0]
                mask = set(BETWEEN[ksq * 64 + c])
                mask.add(c)
            else:
                mask = None
            origins = range(64) if from_sq is None else (from_sq,)
            for frm in origins:
                code = sqs[frm]
                if code * us <= 0:
                    continue
                kind = code * us
                allowed = pins.get(frm)
                if kind == PAWN:
                    self._pawn_moves(frm, mask, allowed, moves)
                elif kind == KNIGHT:
                    for t in KNIGHT_ATTACKS[frm]:
                        tc = sqs[t]
                        if tc * us > 0:
                            continue
                        if mask is not None and t not in mask:
                            continue
                        if allowed is not None and t not in allowed:
                            continue
                        moves.append(Move(frm, t, None, tc != 0))
                elif kind != KING:
                    lo, hi = (0, 8) if kind == QUEEN else ((0, 4) if kind == ROOK else (4, 8))
                    rays = RAYS[frm]
                    for di in range(lo, hi):
                        for t in rays[di]:
                            tc = sqs[t]
                            if tc * us > 0:
                                break
                            if ((mask is None or t in mask)
                                    and (allowed is None or t in allowed)):
                                moves.append(Move(frm, t, None, tc != 0))
                            if tc != 0:
                                break

        if from_sq is None or from_sq == ksq:
            enemy = -us
            for t in KING_ATTACKS[ksq]:
                tc = sqs[t]
                if tc * us > 0:
                    continue
                if not self.attacked(t, enemy, ignore=ksq):
                    moves.append(Move(ksq, t, None, tc != 0))
            if not checkers:
                self._castle_moves(ksq, moves)
        return moves

    def _pawn_moves(self, frm: int, mask, allowed, moves):
        sqs = self.squares
        us = self.stm
        step = 8 * us
        fwd = frm + step
        promo_rank = 7 if us > 0 else 0
        start_rank = 1 if us > 0 else 6
        if sqs[fwd] == 0:
            if (mask is None or fwd in mask) and (allowed is None or fwd in allowed):
                if fwd >> 3 == promo_rank:
                    for p in _PROMO_KINDS:
                        moves.append(Move(frm, fwd, p))
                else:
                    moves.append(Move(frm, fwd))
            if frm >> 3 == start_rank:
                two = fwd + step
                if sqs[two] == 0 and (mask is None or two in mask) and (allowed is None or two in allowed):
                    moves.append(Move(frm, two))
        for t in _pawn_tgt(us)[frm]:
            tc = sqs[t]
            if tc * us < 0:
                if (mask is None or t in mask) and (allowed is None or t in allowed):
                    if t >> 3 == promo_rank:
                        for p in _PROMO_KINDS:
                            moves.append(Move(frm, t, p, True))
                    else:
                        moves.append(Move(frm, t, None, True))
            elif t == self.ep and self.ep >= 0:
                # full simulation: en passant exposes two squares at once
                if self._king_safe_after(frm, t, True):
                    moves.append(Move(frm, t, None, True, True))

    def _castle_moves(self, ksq: int, moves):
        sqs = self.squares
        us = self.stm
        enemy = -us
        rank_base = 0 if us > 0 else 56
        if ksq != rank_base + 4:
            return
        kbit, qbit = (WK_SIDE, WQ_SIDE) if us > 0 else (BK_SIDE, BQ_SIDE)
        rook = ROOK * us
        if (self.castling & kbit
                and sqs[rank_base + 7] == rook
                and sqs[rank_base + 5] == 0 and sqs[rank_base + 6] == 0
                and not self.attacked(rank_base + 5, enemy)
                and not self.attacked(rank_base + 6, enemy)):
            moves.append(Move(ksq, rank_base + 6, castle="K"))
        if (self.castling & qbit
                and sqs[rank_base] == rook
                and sqs[rank_base + 1] == 0 and sqs[rank_base + 2] == 0 and sqs[rank_base + 3] == 0
                and not self.attacked(rank_base + 3, enemy)
                and not self.attacked(rank_base + 2, enemy)):
            moves.append(Move(ksq, rank_base + 2, castle="Q"))

    # -- applying moves --------------------------------------------------

    def apply(self, move: Move) -> "Board":
        """Successor position; the move must already be legal."""
        b = Board.__new__(Board)
        b._ci = None
        sqs = self.squares.copy()
        us = self.stm
        frm, to = move.from_sq, move.to_sq
        code = sqs[frm]
        captured = sqs[to] != 0
        if move.is_en_passant:
            sqs[to - 8 * us] = 0
            captured = True
        sqs[frm] = 0
        sqs[to] = CODE_OF_LETTER[move.promotion] * us if move.promotion else code
        ep = -1
        if code * us == PAWN:
            if to - frm == 16 * us:
                ep = frm + 8 * us
            halfmove = 0
        else:
            halfmove = 0 if captured else self.halfmove_clock + 1
        if move.castle:
            if move.castle == "K":
                sqs[frm + 1] = sqs[frm + 3]
                sqs[frm + 3] = 0
            else:
                sqs[frm - 1] = sqs[frm - 4]
                sqs[frm - 4] = 0
        b.squares = sqs
        b.stm = -us
        b.castling = self.castling & RIGHTS_MASK[frm] & RIGHTS_MASK[to]
        b.ep = ep
        b.halfmove_clock = halfmove
        b.fullmove_number = self.fullmove_number + (1 if us < 0 else 0)
        if code == KING:
            b.wk, b.bk = to, self.bk
        elif code == -KING:
            b.wk, b.bk = self.wk, to
        else:
            b.wk, b.bk = self.wk, self.bk
        return b

    def apply_move(self, move: Move):
        """Validated apply: returns (successor, Step) or raises IllegalMove."""
        if not (0 <= move.from_sq <= 63 and 0 <= move.to_sq <= 63):
            raise IllegalMove(f"square out of range in {move!r}")
        if move not in self.legal_moves(from_sq=move.from_sq):
            raise IllegalMove(f"{move!r} is not legal in {self.fen()!r}")
        moved = PIECE_BY_CODE[self.squares[move.from_sq] + 6]
        if move.is_en_passant:
            captured = PIECE_BY_CODE[-self.stm + 6]
        else:
            captured = PIECE_BY_CODE[self.squares[move.to_sq] + 6]
        ply = 2 * (self.fullmove_number - 1) + (1 if self.stm > 0 else 2)
        step = Step(ply, self.fullmove_number, self, move, moved, captured)
        return self.apply(move), step


def initial_board() -> Board:
    return Board.initial()


def legal_moves(board: Board) -> list:
    return board.legal_moves()


def apply_move(board: Board, move: Move):
    return board.apply_move(move)


def perft(board: Board, depth: int) -> int:
    """Node count used to validate the move generator."""
    if depth <= 0:
        return 1
    moves = board.legal_moves()
    if depth == 1:
        return len(moves)
    return sum(perft(board.apply(m), depth - 1) for m in moves)
