"""Seeded self-play game generator for tests and benchmarks.

Games open from a small book of common lines, then continue with a
greedy-plus-noise policy that prefers captures, development, castling,
center pushes, and promotions.  Output is deterministic for a given
seed, varied enough to cover all corpus recipes: all three results,
games reaching the endgame segment, promotions, en passant, and the
queenside pawn push b4-b5.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from chessvec.core import (Board, GameRecord, Move, parse_san, write_pgn,
                           write_store)

_BOOK_SAN = [
    "e4 e5 Nf3 Nc6 Bc4 Bc5",
    "e4 e5 Nf3 Nc6 Bb5 a6 Ba4 Nf6",
    "e4 c5 Nf3 d6 d4 cxd4 Nxd4 Nf6 Nc3",
    "e4 c5 Nc3 Nc6",
    "e4 e6 d4 d5",
    "e4 c6 d4 d5",
    "d4 d5 c4 e6 Nc3 Nf6",
    "d4 Nf6 c4 e6 Nc3 Bb4",
    "d4 Nf6 c4 g6 Nc3 Bg7",
    "d4 d5 Nf3 Nf6 Bf4",
    "Nf3 d5 g3 Nf6 Bg2",
    "c4 e5 Nc3 Nf6",
    "b4 e6 Bb2 Nf6 b5",
    "b4 d5 Bb2 Nf6 e3 e6 b5",
    "e4 e5 Nf3 Nc6 d4 exd4",
    "d4 f5 g3 Nf6",
]

_PIECE_VALUE = {"P": 1.0, "N": 3.0, "B": 3.1, "R": 5.0, "Q": 9.0, "K": 0.0}


def _book_lines() -> List[List[Move]]:
    lines = []
    for san_line in _BOOK_SAN:
        board = Board.initial()
        moves = []
        for text in san_line.split():
            move = parse_san(board, text)
            board = board.apply(move)
            moves.append(move)
        lines.append(moves)
    return lines


_BOOK: Optional[List[List[Move]]] = None


def _score(board: Board, move: Move, ply: int, prev: Optional[Move]) -> float:
    piece = board.piece_at(move.from_sq)
    score = 0.0
    if move.is_capture:
        victim = board.piece_at(move.to_sq)
        value = _PIECE_VALUE[victim.kind] if victim else 1.0  # en passant
        score += value + 1.0
    if move.promotion:
        score += 8.0 if move.promotion == "Q" else 1.0
    if move.castle:
        score += 3.0
    from_rank = move.from_sq // 8
    to_rank = move.to_sq // 8
    home = 0 if piece.color == "white" else 7
    if ply < 20 and piece.kind in ("N", "B") and from_rank == home:
        score += 1.5
    if piece.kind == "P":
        file = move.from_sq % 8
        forward = to_rank if piece.color == "white" else 7 - to_rank
        if file in (3, 4) and ply < 24 and forward >= 3:
            score += 1.2
        elif forward >= 4:
            score += 0.35  # keep wing expansion like b4-b5 in the mix
    if piece.kind == "K" and not move.castle and ply < 30:
        score -= 2.0
    if piece.kind == "Q" and ply < 10:
        score -= 1.0
    if prev is not None and move.from_sq == prev.to_sq and move.to_sq == prev.from_sq:
        score -= 3.0
    return score


def _material(board: Board) -> float:
    total = 0.0
    for sq in range(64):
        piece = board.piece_at(sq)
        if piece and piece.kind != "K":
            value = _PIECE_VALUE[piece.kind]
            total += value if piece.color == "white" else -value
    return total


def generate_game(seed, max_plies: Optional[int] = None) -> GameRecord:
    """One legal game, deterministic in `seed`."""
    global _BOOK
    if _BOOK is None:
        _BOOK = _book_lines()
    rng = np.random.default_rng(seed)
    board = Board.initial()
    moves: List[Move] = []
    cap = max_plies if max_plies is not None else int(rng.integers(40, 140))
    if rng.random() < 0.85:
        line = _BOOK[rng.integers(len(_BOOK))]
        keep = int(rng.integers(2, len(line) + 1))
        for move in line[:keep]:
            board = board.apply(move)
            moves.append(move)
    prev: Optional[Move] = None
    result = None
    while len(moves) < cap:
        legal = board.legal_moves()
        if not legal:
            if board.in_check():
                result = "0-1" if board.side_to_move == "white" else "1-0"
            else:
                result = "1/2-1/2"
            break
        if board.halfmove_clock >= 100:
            result = "1/2-1/2"
            break
        if rng.random() < 0.03:
            move = legal[int(rng.integers(len(legal)))]
        else:
            noise = rng.gumbel(size=len(legal))
            best, best_val = None, -np.inf
            for i, candidate in enumerate(legal):
                val = _score(board, candidate, len(moves), prev) + 1.1 * noise[i]
                if val > best_val:
                    best, best_val = candidate, val
            move = best
        board = board.apply(move)
        moves.append(move)
        prev = move
    if result is None:
        diff = _material(board)
        if diff >= 3.5:
            result = "1-0"
        elif diff <= -3.5:
            result = "0-1"
        else:
            result = "1/2-1/2"
    return GameRecord(headers=(), moves=tuple(moves), result=result)


def generate_games(count: int, seed: int = 1) -> List[GameRecord]:
    return [generate_game((seed, i)) for i in range(count)]


def games_to_store(count: int, path, seed: int = 1) -> int:
    return write_store((generate_game((seed, i)) for i in range(count)), path)


def games_to_pgn(games, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for game in games:
            write_pgn(game, out)


def games_to_long_pgn(games, path) -> None:
    """Movetext in long-algebraic tokens, one game per block."""
    from chessvec.core import move_to_long

    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for game in games:
            board = Board.initial()
            tokens = []
            for move in game.moves:
                tokens.append(move_to_long(board, move))
                board = board.apply(move)
            tokens.append(game.result)
            out.write(" ".join(tokens) + "\n\n")
