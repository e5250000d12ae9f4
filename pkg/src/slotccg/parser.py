"""CKY chart parsing over candidate supertags."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .categories import (
    BACKWARD,
    CONJ,
    DEFAULT_MAX_DEPTH,
    FORWARD,
    NP,
    S,
    Category,
    back,
    fwd,
)
from .lexicon import Lexicon, LexiconCoverageError

FA, BA, FC, BC, CONJ_RULE = "fa", "ba", "fc", "bc", "conj"
ROOT_CATEGORIES = frozenset({S, NP})


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str
    entity: Optional[str] = None
    is_blank: bool = False

    def __post_init__(self):
        if self.is_blank and self.entity is not None:
            raise ValueError("a blank token cannot carry an entity")

    @property
    def lemma(self) -> str:
        return self.surface.lower()


@dataclass(frozen=True)
class ParseConfig:
    beam_width: int = 50
    top_n: int = 10
    max_category_depth: int = DEFAULT_MAX_DEPTH


_COMBINE_CACHE: dict = {}


def apply_combinator(left: Category, right: Category) -> Optional[tuple[Category, str]]:
    """Combine two adjacent categories with the first rule that applies.

    Rules are tried in order: forward application, backward application,
    forward composition, backward composition, conjunction (conj X => X\\X).
    """
    key = (left, right)
    try:
        return _COMBINE_CACHE[key]
    except KeyError:
        pass
    out = None
    lc = not left.is_atomic
    rc = not right.is_atomic
    if lc and left.slash == FORWARD and left.argument == right:
        out = (left.result, FA)
    elif rc and right.slash == BACKWARD and right.argument == left:
        out = (right.result, BA)
    elif lc and rc and left.slash == FORWARD and right.slash == FORWARD and left.argument == right.result:
        out = (fwd(left.result, right.argument), FC)
    elif lc and rc and left.slash == BACKWARD and right.slash == BACKWARD and right.argument == left.result:
        out = (back(right.result, left.argument), BC)
    elif left == CONJ and right != CONJ:
        out = (back(right, right), CONJ_RULE)
    _COMBINE_CACHE[key] = out
    return out


def normal_form_ok(rule: str, left, right) -> bool:
    """Eisner-style spurious-ambiguity filter.

    The output of forward composition may not be the functor of a forward
    application or composition, and symmetrically for backward rules. Every
    semantically distinct analysis keeps at least one derivation.
    """
    if rule in (FA, FC):
        return getattr(left, "combinator", None) != FC
    if rule in (BA, BC):
        return getattr(right, "combinator", None) != BC
    return True


class Leaf:
    __slots__ = ("index", "category", "start", "end", "depth_sum", "combinators", "key")

    def __init__(self, index: int, category: Category):
        self.index = index
        self.category = category
        self.start = index
        self.end = index + 1
        self.depth_sum = category.depth
        self.combinators = frozenset()
        self.key = f"{category}@{index}"

    def leaves(self):
        yield self

    def __repr__(self):
        return f"Leaf({self.index}, {self.category})"


class Node:
    __slots__ = ("combinator", "category", "left", "right", "start", "end", "depth_sum", "combinators", "key")

    def __init__(self, combinator: str, category: Category, left, right):
        self.combinator = combinator
        self.category = category
        self.left = left
        self.right = right
        self.start = left.start
        self.end = right.end
        self.depth_sum = left.depth_sum + right.depth_sum
        self.combinators = left.combinators | right.combinators | {combinator}
        self.key = f"({combinator} {left.key} {right.key})"

    def leaves(self):
        yield from self.left.leaves()
        yield from self.right.leaves()

    def __repr__(self):
        return f"Node({self.combinator}, {self.category})"


def _tree_score(t) -> float:
    return -len(t.combinators) - 0.1 * t.depth_sum


@dataclass(frozen=True, eq=False)
class Derivation:
    """A complete binary derivation; ``tree`` is a Leaf or Node."""

    tree: object

    @property
    def root(self) -> Category:
        return self.tree.category

    @property
    def score(self) -> float:
        return score_derivation(self)

    @property
    def key(self) -> str:
        return self.tree.key

    def leaves(self) -> list[Leaf]:
        return list(self.tree.leaves())

    @property
    def supertags(self) -> list[Category]:
        return [leaf.category for leaf in self.leaves()]

    def __eq__(self, other):
        return isinstance(other, Derivation) and other.key == self.key

    def __hash__(self):
        return hash(self.key)

    def __len__(self):
        return self.tree.end - self.tree.start

    def __str__(self):
        return self.key


def score_derivation(d: Derivation) -> float:
    """Simplicity heuristic: -(distinct combinator types) - 0.1 * sum of leaf depths."""
    return _tree_score(d.tree)


def _sort_key(t):
    return (-_tree_score(t), t.key)


def candidate_sets(tokens: Sequence[Token], lexicon: Lexicon | None = None,
                   supertags: Sequence[Category] | None = None) -> list[frozenset[Category]]:
    """Per-token candidate categories under the active supervision mode."""
    if supertags is not None:
        if len(supertags) != len(tokens):
            raise ValueError("supertag count does not match token count")
        sets = [frozenset({c}) for c in supertags]
    elif lexicon is not None:
        sets = lexicon.candidates([t.surface for t in tokens], [t.pos for t in tokens])
    else:
        raise ValueError("need a lexicon or gold supertags")
    out = []
    for i, (tok, cats) in enumerate(zip(tokens, sets)):
        if tok.is_blank:
            cats = frozenset({NP})
        if not cats:
            raise LexiconCoverageError(f"no candidate category for token {i} {tok.surface!r} ({tok.pos})")
        out.append(cats)
    return out


def parse(tokens: Sequence[Token], lexicon: Lexicon | None = None, cfg: ParseConfig = ParseConfig(),
          supertags: Sequence[Category] | None = None,
          candidates: Sequence[frozenset[Category]] | None = None) -> list[Derivation]:
    """All complete derivations surviving the per-cell beam, best first.

    Supertags, when given, replace the lexicon (gold mode). A precomputed
    ``candidates`` list may be passed instead of either. Returns at most
    ``cfg.top_n`` derivations rooted in S or NP; an empty list means the
    sentence has no full analysis.
    """
    if not tokens:
        raise ValueError("cannot parse an empty sentence")
    if candidates is None:
        candidates = candidate_sets(tokens, lexicon, supertags)
    n = len(tokens)
    beam = cfg.beam_width
    chart: dict[tuple[int, int], list] = {}
    for i, cats in enumerate(candidates):
        leaves = [Leaf(i, c) for c in cats if c.depth <= cfg.max_category_depth]
        if not leaves:
            raise LexiconCoverageError(f"no category within depth limit for token {i} {tokens[i].surface!r}")
        leaves.sort(key=_sort_key)
        chart[i, i + 1] = leaves

    # cell -> {category: [items]} for fast pairing
    grouped: dict[tuple[int, int], dict[Category, list]] = {}

    def group(cell):
        g = grouped.get(cell)
        if g is None:
            g = {}
            for item in chart[cell]:
                g.setdefault(item.category, []).append(item)
            grouped[cell] = g
        return g

    for length in range(2, n + 1):
        for i in range(0, n - length + 1):
            j = i + length
            items = []
            for k in range(i + 1, j):
                left_g = group((i, k))
                right_g = group((k, j))
                if not left_g or not right_g:
                    continue
                for lcat, litems in left_g.items():
                    for rcat, ritems in right_g.items():
                        res = apply_combinator(lcat, rcat)
                        if res is None:
                            continue
                        cat, rule = res
                        if cat.depth > cfg.max_category_depth:
                            continue
                        if length == n and cat not in ROOT_CATEGORIES:
                            continue
                        for l in litems:
                            for r in ritems:
                                if normal_form_ok(rule, l, r):
                                    items.append(Node(rule, cat, l, r))
            if beam is not None and len(items) > beam:
                items.sort(key=_sort_key)
                items = items[:beam]
            else:
                items.sort(key=_sort_key)
            chart[i, j] = items

    full = [t for t in chart[0, n] if t.category in ROOT_CATEGORIES]
    full.sort(key=_sort_key)
    if cfg.top_n is not None:
        full = full[: cfg.top_n]
    return [Derivation(t) for t in full]


def validate_derivation(d: Derivation) -> bool:
    """Re-derive every internal node bottom-up with :func:`apply_combinator`."""

    def check(t):
        if isinstance(t, Leaf):
            return True
        res = apply_combinator(t.left.category, t.right.category)
        return (
            res is not None
            and res == (t.category, t.combinator)
            and t.left.end == t.right.start
            and check(t.left)
            and check(t.right)
        )

    leaves = d.leaves()
    contiguous = [leaf.index for leaf in leaves] == list(range(d.tree.start, d.tree.end))
    return contiguous and check(d.tree)


def is_normal_form(d: Derivation) -> bool:
    def check(t):
        if isinstance(t, Leaf):
            return True
        return normal_form_ok(t.combinator, t.left, t.right) and check(t.left) and check(t.right)

    return check(d.tree)


def build_derivation(tree) -> Derivation:
    """Build a derivation from a nested bracketing of leaf categories.

    ``tree`` is either a category or a 2-element list ``[left, right]``;
    leaves are numbered left to right and combinators are inferred. Handy for
    writing reference derivations by hand.
    """
    counter = [0]

    def build(s):
        if isinstance(s, Category):
            leaf = Leaf(counter[0], s)
            counter[0] += 1
            return leaf
        left, right = s
        l = build(left)
        r = build(right)
        res = apply_combinator(l.category, r.category)
        if res is None:
            raise ValueError(f"cannot combine {l.category} and {r.category}")
        return Node(res[1], res[0], l, r)

    return Derivation(build(tree))


__all__ = [
    "Token",
    "ParseConfig",
    "Derivation",
    "Leaf",
    "Node",
    "apply_combinator",
    "parse",
    "score_derivation",
    "validate_derivation",
    "candidate_sets",
    "build_derivation",
    "normal_form_ok",
    "is_normal_form",
]
