"""Corpus files from replayed games, one recipe per model variant.

A Type-1 sentence is a whole game's move tokens.  A Type-2 sentence is
one move: the occupancy of the board it was played on, then the move
token with a "->" prefix.  A pro sentence wraps a White move with up to
three arrow-prefixed moves of context on each side around the occupancy
block.  Nineteen named recipes bind the filters; custom combinations
are allowed.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from multiprocessing import Pool
from typing import List, Optional, Sequence

from .core.board import Step, WHITE
from .core.pgn import BLACK_WIN, DRAW, WHITE_WIN, read_store
from .core.replay import replay_tokens
from .errors import ChessvecError
from .tokens import encode_move, encode_occupancy

DEBUT_LAST_FULLMOVE = 12
MITTEL_LAST_FULLMOVE = 30

SENTENCE_TYPES = ("type1", "type2", "pro")
SEGMENTS = ("all", "debut", "mittel", "endgame")
COLORS = ("both", "white", "black")
QUEEN_FILTERS = ("any", "present", "gone")
RESULT_FILTERS = ("any", "decisive", "draw")


def segment_of(fullmove: int) -> str:
    if fullmove <= DEBUT_LAST_FULLMOVE:
        return "debut"
    if fullmove <= MITTEL_LAST_FULLMOVE:
        return "mittel"
    return "endgame"


@dataclass(frozen=True)
class CorpusRecipe:
    name: str
    sentence_type: str = "type1"
    segment: str = "all"
    color: str = "both"
    queens: str = "any"
    result: str = "any"
    pos_tags: bool = False
    lemmatize: bool = False

    def __post_init__(self):
        if self.sentence_type not in SENTENCE_TYPES:
            raise ValueError(f"bad sentence_type {self.sentence_type!r}")
        if self.segment not in SEGMENTS:
            raise ValueError(f"bad segment {self.segment!r}")
        if self.color not in COLORS:
            raise ValueError(f"bad color {self.color!r}")
        if self.queens not in QUEEN_FILTERS:
            raise ValueError(f"bad queens filter {self.queens!r}")
        if self.result not in RESULT_FILTERS:
            raise ValueError(f"bad result filter {self.result!r}")
        if self.lemmatize and self.sentence_type != "type1":
            raise ValueError("lemmatize applies to type1 recipes only")

    def admits_result(self, result: str) -> bool:
        if self.result == "decisive":
            return result in (WHITE_WIN, BLACK_WIN)
        if self.result == "draw":
            return result == DRAW
        return True

    @property
    def needs_replay(self) -> bool:
        """Board state is required unless stream shape alone decides."""
        return self.sentence_type != "type1" or self.queens != "any" or self.pos_tags


RECIPES = {
    r.name: r
    for r in (
        CorpusRecipe("moves_texts"),
        CorpusRecipe("lemmatized_moves_texts", lemmatize=True),
        CorpusRecipe("white_moves", sentence_type="type2", color="white"),
        CorpusRecipe("black_moves", sentence_type="type2", color="black"),
        CorpusRecipe("debut_moves", segment="debut"),
        CorpusRecipe("debut_positions", sentence_type="type2", segment="debut", color="white"),
        CorpusRecipe("mittel_moves", segment="mittel"),
        CorpusRecipe("mittel_positions", sentence_type="type2", segment="mittel", color="white"),
        CorpusRecipe("endgame_moves", segment="endgame"),
        CorpusRecipe("endgame_positions", sentence_type="type2", segment="endgame", color="white"),
        CorpusRecipe("moves_pos", pos_tags=True),
        CorpusRecipe("positions_pos", sentence_type="type2", pos_tags=True, color="white"),
        CorpusRecipe("queens_moves", queens="present"),
        CorpusRecipe("no_queens_moves", queens="gone"),
        CorpusRecipe("queens_positions", sentence_type="type2", queens="present", color="white"),
        CorpusRecipe("no_queens_positions", sentence_type="type2", queens="gone", color="white"),
        CorpusRecipe("positions_moves_pro", sentence_type="pro", color="white"),
        CorpusRecipe("result_moves", result="decisive"),
        CorpusRecipe("tied_moves", result="draw"),
    )
}


def recipe_variant(base: CorpusRecipe, **changes) -> CorpusRecipe:
    if "name" not in changes:
        changes["name"] = base.name + "_custom"
    return dataclasses.replace(base, **changes)


@dataclass
class CorpusStats:
    games_in: int = 0
    games_used: int = 0
    games_skipped: int = 0
    sentences: int = 0
    tokens: int = 0
    distinct_tokens: int = 0


def _queens_before(steps: Sequence[Step]) -> List[int]:
    """Queen count (either color) on each step's board_before."""
    counts = []
    queens = sum(1 for code in steps[0].board_before.squares if abs(code) == 5) if steps else 0
    for step in steps:
        counts.append(queens)
        if step.captured is not None and step.captured.kind == "Q":
            queens -= 1
        if step.move.promotion == "Q":
            queens += 1
    return counts


def _passing(steps: Sequence[Step], recipe: CorpusRecipe) -> List[Step]:
    if recipe.queens == "any":
        queens = None
        first_gone = None
    else:
        queens = _queens_before(steps)
        first_gone = next((i for i, q in enumerate(queens) if q == 0), None)
    out = []
    for i, step in enumerate(steps):
        if recipe.segment != "all" and segment_of(step.fullmove_number) != recipe.segment:
            continue
        if recipe.color != "both" and step.moved_piece.color != recipe.color:
            continue
        if recipe.queens == "present" and queens[i] < 1:
            continue
        if recipe.queens == "gone" and (first_gone is None or i < first_gone):
            continue
        out.append(step)
    return out


def type1_sentence(steps: Sequence[Step], recipe: CorpusRecipe) -> List[str]:
    """One token per passing step, in ply order."""
    if recipe.sentence_type != "type1":
        raise ValueError("type1_sentence needs a type1 recipe")
    return [
        encode_move(step, pos_tags=recipe.pos_tags, lemma=recipe.lemmatize)
        for step in _passing(steps, recipe)
    ]


def type2_sentences(steps: Sequence[Step], recipe: CorpusRecipe) -> List[List[str]]:
    """One occupancy-plus-move sentence per passing step."""
    if recipe.sentence_type != "type2":
        raise ValueError("type2_sentences needs a type2 recipe")
    out = []
    for step in _passing(steps, recipe):
        sentence = encode_occupancy(step.board_before)
        sentence.append(encode_move(step, arrow=True, pos_tags=recipe.pos_tags))
        out.append(sentence)
    return out


def pro_sentences(steps: Sequence[Step]) -> List[List[str]]:
    """Per White move: up to 3 moves before, the occupancy, the move,
    up to 3 moves after, every move token arrow-prefixed."""
    out = []
    for i, step in enumerate(steps):
        if step.moved_piece.color != WHITE:
            continue
        sentence = [encode_move(s, arrow=True) for s in steps[max(0, i - 3):i]]
        sentence.extend(encode_occupancy(step.board_before))
        sentence.append(encode_move(step, arrow=True))
        sentence.extend(encode_move(s, arrow=True) for s in steps[i + 1:i + 4])
        out.append(sentence)
    return out


def _fast_type1(tokens: Sequence[str], recipe: CorpusRecipe) -> List[str]:
    """Type-1 tokens straight from validated store tokens.

    Valid only when no filter needs board state: segment comes from the
    ply index, color from the letter case, lemmas from string surgery.
    """
    out = []
    for i, token in enumerate(tokens):
        if recipe.segment != "all":
            if segment_of(i // 2 + 1) != recipe.segment:
                continue
        if recipe.color != "both":
            white = token[0].isupper()
            if white != (recipe.color == "white"):
                continue
        if recipe.lemmatize:
            token = token[0] + token[3:]
        out.append(token)
    return out


def game_sentences(tokens: Sequence[str], recipe: CorpusRecipe) -> List[List[str]]:
    """All sentences one store game contributes under a recipe."""
    if not recipe.needs_replay:
        sentence = _fast_type1(tokens, recipe)
        return [sentence] if sentence else []
    steps = replay_tokens(tokens)
    if recipe.sentence_type == "type1":
        sentence = type1_sentence(steps, recipe)
        return [sentence] if sentence else []
    if recipe.sentence_type == "type2":
        return [s for s in type2_sentences(steps, recipe) if s]
    return [s for s in pro_sentences(steps) if s]


def _worker(args):
    index, result, tokens, recipe = args
    try:
        lines = [" ".join(s) for s in game_sentences(tokens, recipe)]
    except ChessvecError as exc:
        return index, None, str(exc)
    return index, lines, None


def build_corpus(store_path, recipe: CorpusRecipe, out_path, jobs: int = 1,
                 deterministic: bool = True) -> CorpusStats:
    """Stream a game store through the sentence builders into a file."""
    stats = CorpusStats()
    distinct = set()

    def admitted():
        for game in read_store(store_path):
            stats.games_in += 1
            if not recipe.admits_result(game.result):
                continue
            yield game.index, game.result, game.tokens, recipe

    with open(out_path, "w", encoding="utf-8", newline="\n") as out:

        def consume(item):
            _, lines, error = item
            if error is not None:
                stats.games_skipped += 1
                return
            if lines:
                stats.games_used += 1
            for line in lines:
                out.write(line + "\n")
                stats.sentences += 1
                parts = line.split(" ")
                stats.tokens += len(parts)
                distinct.update(parts)

        if jobs > 1:
            with Pool(jobs) as pool:
                mapper = pool.imap if deterministic else pool.imap_unordered
                for item in mapper(_worker, admitted(), chunksize=64):
                    consume(item)
        else:
            for args in admitted():
                consume(_worker(args))

    stats.distinct_tokens = len(distinct)
    return stats
