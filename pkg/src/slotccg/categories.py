"""CCG category algebra: parsing, rendering and co-indexation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

ATOMS = ("S", "NP", "N", "PP", "conj", "comma")
FORWARD = "/"
BACKWARD = "\\"

DEFAULT_MAX_DEPTH = 5


class CategoryParseError(ValueError):
    """Malformed category string; ``offset`` is the failing character position."""

    def __init__(self, message: str, text: str, offset: int):
        super().__init__(f"{message} at offset {offset} in {text!r}")
        self.text = text
        self.offset = offset


class Category:
    """Base class for atomic and complex categories.

    Instances are immutable and hash by structure. The hash is computed once
    because categories are used heavily as dictionary keys in the chart.
    """

    __slots__ = ("_hash", "_str")

    is_atomic = False

    @property
    def depth(self) -> int:
        raise NotImplementedError

    @property
    def arity(self) -> int:
        raise NotImplementedError

    def atoms(self) -> Iterator["Atom"]:
        """Atomic sub-categories in preorder (result before argument)."""
        raise NotImplementedError

    @property
    def n_atoms(self) -> int:
        raise NotImplementedError

    @property
    def root(self) -> "Atom":
        """The atom at the end of the result chain, e.g. S for (S\\NP)/NP."""
        raise NotImplementedError

    def is_modifier(self) -> bool:
        return False

    def __repr__(self):
        return f"Category({str(self)!r})"


# structurally equal categories are shared, so equality and hashing in the
# parser's hot loops mostly reduce to identity checks
_INTERNED: dict = {}


class Atom(Category):
    __slots__ = ("name",)
    is_atomic = True

    def __new__(cls, name: str):
        obj = _INTERNED.get(name)
        if obj is None:
            if name not in ATOMS:
                raise ValueError(f"unknown atom {name!r}")
            obj = object.__new__(cls)
            obj._setup(name)
            _INTERNED[name] = obj
        return obj

    def __init__(self, name: str):
        pass

    def __reduce__(self):
        return (Atom, (self.name,))

    def _setup(self, name):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("atom", name)))
        object.__setattr__(self, "_str", "," if name == "comma" else name)

    def __setattr__(self, key, value):
        raise AttributeError("categories are immutable")

    def __eq__(self, other):
        return self is other or (isinstance(other, Atom) and other.name == self.name)

    def __hash__(self):
        return self._hash

    def __str__(self):
        return self._str

    @property
    def depth(self):
        return 0

    @property
    def arity(self):
        return 0

    @property
    def n_atoms(self):
        return 1

    @property
    def root(self):
        return self

    def atoms(self):
        yield self


class Complex(Category):
    __slots__ = ("result", "slash", "argument", "_depth", "_arity", "_n_atoms")

    def __new__(cls, result: Category, slash: str, argument: Category):
        key = (result, slash, argument)
        obj = _INTERNED.get(key)
        if obj is None:
            if slash not in (FORWARD, BACKWARD):
                raise ValueError(f"bad slash {slash!r}")
            obj = object.__new__(cls)
            obj._setup(result, slash, argument)
            _INTERNED[key] = obj
        return obj

    def __init__(self, result: Category, slash: str, argument: Category):
        pass

    def __reduce__(self):
        return (Complex, (self.result, self.slash, self.argument))

    def _setup(self, result, slash, argument):
        set_ = object.__setattr__
        set_(self, "result", result)
        set_(self, "slash", slash)
        set_(self, "argument", argument)
        set_(self, "_depth", 1 + max(result.depth, argument.depth))
        set_(self, "_arity", 1 + result.arity)
        set_(self, "_n_atoms", result.n_atoms + argument.n_atoms)
        set_(self, "_hash", hash((result._hash, slash, argument._hash)))
        set_(self, "_str", None)

    def __setattr__(self, key, value):
        raise AttributeError("categories are immutable")

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Complex)
            and other._hash == self._hash
            and other.slash == self.slash
            and other.result == self.result
            and other.argument == self.argument
        )

    def __hash__(self):
        return self._hash

    def __str__(self):
        if self._str is None:
            object.__setattr__(self, "_str", _wrap(self.result) + self.slash + _wrap(self.argument))
        return self._str

    @property
    def depth(self):
        return self._depth

    @property
    def arity(self):
        return self._arity

    @property
    def n_atoms(self):
        return self._n_atoms

    @property
    def root(self):
        return self.result.root

    def atoms(self):
        yield from self.result.atoms()
        yield from self.argument.atoms()

    def is_modifier(self):
        return self.result == self.argument


def _wrap(c: Category) -> str:
    return str(c) if c.is_atomic else f"({c})"


S = Atom("S")
NP = Atom("NP")
N = Atom("N")
PP = Atom("PP")
CONJ = Atom("conj")
COMMA = Atom("comma")
NOMINAL_ATOMS = frozenset({N, NP})


def fwd(result: Category, argument: Category) -> Complex:
    return Complex(result, FORWARD, argument)


def back(result: Category, argument: Category) -> Complex:
    return Complex(result, BACKWARD, argument)


def render(c: Category) -> str:
    return str(c)


# -- parsing ---------------------------------------------------------------

_ATOM_SPELLINGS = sorted(
    [("conj", "conj"), ("comma", "comma"), ("NP", "NP"), ("PP", "PP"), ("S", "S"), ("N", "N"), (",", "comma")],
    key=lambda kv: -len(kv[0]),
)


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message):
        raise CategoryParseError(message, self.text, self.pos)

    def parse_category(self) -> Category:
        left = self.parse_primary()
        while self.pos < len(self.text) and self.text[self.pos] in "/\\":
            slash = self.text[self.pos]
            self.pos += 1
            right = self.parse_primary()
            left = Complex(left, slash, right)
        return left

    def parse_primary(self) -> Category:
        text = self.text
        if self.pos >= len(text):
            self.error("unexpected end of category")
        if text[self.pos] == "(":
            self.pos += 1
            inner = self.parse_category()
            if self.pos >= len(text) or text[self.pos] != ")":
                self.error("expected ')'")
            self.pos += 1
            return inner
        for spelling, name in _ATOM_SPELLINGS:
            if text.startswith(spelling, self.pos):
                self.pos += len(spelling)
                return Atom(name)
        self.error(f"unexpected character {text[self.pos]!r}")


_PARSE_CACHE: dict[str, Category] = {}


def parse_category(s: str) -> Category:
    """Parse a category string such as ``(S\\NP)/NP``.

    Unparenthesised slash sequences associate to the left, so ``S\\NP/NP`` is
    ``(S\\NP)/NP``. Raises :class:`CategoryParseError` with the offending offset.
    """
    cached = _PARSE_CACHE.get(s)
    if cached is not None:
        return cached
    reader = _Reader(s.strip())
    result = reader.parse_category()
    if reader.pos != len(reader.text):
        reader.error("trailing characters")
    _PARSE_CACHE[s] = result
    return result


def parse_category_list(s: str) -> list[Category]:
    """Parse a comma-separated list of categories.

    The comma atom is itself spelled ``,`` so separators are recognised
    positionally: a comma directly after a complete category is a separator.
    """
    reader = _Reader(s.strip())
    out = []
    if not reader.text:
        return out
    while True:
        out.append(reader.parse_category())
        if reader.pos == len(reader.text):
            return out
        if reader.text[reader.pos] != ",":
            reader.error("expected ',' between categories")
        reader.pos += 1


# -- co-indexation ---------------------------------------------------------


@dataclass(frozen=True)
class CoindexedCategory:
    """A category with a head variable on every atomic position.

    ``variables`` lists one variable per atom in preorder, so positions line
    up with :meth:`Category.atoms`. Variable ids are contiguous from 0 and the
    root head is always the first atom's variable.
    """

    category: Category
    variables: tuple[int, ...]

    @property
    def root_head(self) -> int:
        return self.variables[0]

    @property
    def heads(self) -> dict[tuple[str, ...], int]:
        """Map from atom position (path of 'r'/'a' steps) to variable id."""
        return dict(zip(atom_positions(self.category), self.variables))

    @property
    def n_vars(self) -> int:
        return len(set(self.variables))

    def __str__(self):
        it = iter(self.variables)

        def show(c):
            if c.is_atomic:
                return f"{c}_{next(it)}"
            r = show(c.result)
            a = show(c.argument)
            r = r if c.result.is_atomic else f"({r})"
            a = a if c.argument.is_atomic else f"({a})"
            return r + c.slash + a

        return show(self.category)


def atom_positions(c: Category, path=()) -> list[tuple[str, ...]]:
    if c.is_atomic:
        return [path]
    return atom_positions(c.result, path + ("r",)) + atom_positions(c.argument, path + ("a",))


def _renumber(vs: list[int]) -> tuple[int, ...]:
    mapping: dict[int, int] = {}
    return tuple(mapping.setdefault(v, len(mapping)) for v in vs)


def _default_vars(c: Category, counter: list[int]) -> list[int]:
    if c.is_atomic:
        counter[0] += 1
        return [counter[0] - 1]
    rv = _default_vars(c.result, counter)
    if c.is_modifier():
        return rv + rv
    return rv + _default_vars(c.argument, counter)


def _is_verbal_modifier(c: Category) -> bool:
    # (S|N)|(S|N) or (S|NP)|(S|NP): auxiliary vs control ambiguity
    if c.is_atomic or not c.is_modifier():
        return False
    inner = c.result
    return (
        not inner.is_atomic
        and inner.result == S
        and inner.argument in NOMINAL_ATOMS
    )


def coindex(c: Category) -> list[CoindexedCategory]:
    """Co-indexations of ``c``, the default one first.

    Modifiers X|X share variables between result and argument. Verb-phrase
    modifiers of shape (S|N)|(S|N) also get a second reading in which the two
    S heads are distinct and only the subject is shared.
    """
    default = _renumber(_default_vars(c, [0]))
    out = [CoindexedCategory(c, default)]
    if _is_verbal_modifier(c):
        # atoms: S_r N_r S_a N_a; distinct-head variant gives S_a a fresh var
        s_r, n_r, _, _ = default
        variant = _renumber([s_r, n_r, max(default) + 1, n_r])
        out.append(CoindexedCategory(c, variant))
    return out


def split_vars(c: Complex, variables: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split a variable tuple into the result part and the argument part."""
    k = c.result.n_atoms
    return variables[:k], variables[k:]


def arguments(c: Category) -> list[tuple[str, Category]]:
    """Arguments of ``c`` outermost first, as (slash, category) pairs."""
    out = []
    while not c.is_atomic:
        out.append((c.slash, c.argument))
        c = c.result
    return out
