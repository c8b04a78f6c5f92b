"""Full-game replay producing per-ply Step records."""

from __future__ import annotations

from typing import List, Sequence

from ..errors import ChessvecError, IllegalMove
from .board import Board, Step
from .pgn import GameRecord
from .san import parse_long


def replay(game: GameRecord) -> List[Step]:
    """Steps for every move of the game, from the standard start."""
    board = Board.initial()
    steps = []
    for i, move in enumerate(game.moves):
        try:
            board, step = board.apply_move(move)
        except IllegalMove as exc:
            raise IllegalMove(f"ply {i + 1}: {exc}") from None
        steps.append(step)
    return steps


def replay_tokens(tokens: Sequence[str]) -> List[Step]:
    """Steps for a store line's long-algebraic tokens."""
    board = Board.initial()
    steps = []
    for i, token in enumerate(tokens):
        try:
            move = parse_long(board, token)
        except ChessvecError as exc:
            raise IllegalMove(f"ply {i + 1}: {exc}") from None
        moved = board.piece_at(move.from_sq)
        if move.is_en_passant:
            captured = board.piece_at(move.to_sq - (8 if board.stm > 0 else -8))
        else:
            captured = board.piece_at(move.to_sq)
        ply = i + 1
        steps.append(Step(ply, board.fullmove_number, board, move, moved, captured))
        board = board.apply(move)
    return steps
