"""Words over a family's alphabet.

A word is a tuple of 0-based letter indices; the word ``(d1, ..., dn)`` stands
for the product ``A[d1] @ ... @ A[dn]`` and the empty word for the identity.
Strings of digits (``"0101"``) are accepted anywhere a word is expected.

Besides the basic predicates this module implements the white/black
classification relative to a dominant word ``pi`` and the partition of a long
word into powers of ``pi`` separated by black words of controlled length.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence, Union

from .errors import InvalidInput

Word = tuple[int, ...]
WordLike = Union[str, Sequence[int]]


def as_word(w: WordLike) -> Word:
    if isinstance(w, str):
        if not all(c.isdigit() for c in w):
            raise InvalidInput(f"word string must contain digits only: {w!r}")
        return tuple(int(c) for c in w)
    word = tuple(int(c) for c in w)
    if any(c < 0 for c in word):
        raise InvalidInput("letters must be nonnegative")
    return word


def word_str(w: WordLike) -> str:
    """Digit-string rendering; letters >= 10 are dot-separated."""
    w = as_word(w)
    if all(c < 10 for c in w):
        return "".join(map(str, w))
    return ".".join(map(str, w))


def is_simple(w: WordLike) -> bool:
    """True iff ``w`` is not a power of a strictly shorter word."""
    w = as_word(w)
    n = len(w)
    if n == 0:
        raise InvalidInput("simplicity is undefined for the empty word")
    for d in range(1, n // 2 + 1):
        if n % d == 0 and w[:d] * (n // d) == w:
            return False
    return True


def primitive_root(w: WordLike) -> Word:
    """Shortest ``u`` with ``w = u^k``."""
    w = as_word(w)
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and w[:d] * (n // d) == w:
            return w[:d]
    return w


def rotations(w: WordLike) -> Iterator[Word]:
    w = as_word(w)
    for i in range(max(len(w), 1)):
        yield w[i:] + w[:i]


def cyclically_equal(w1: WordLike, w2: WordLike) -> bool:
    w1, w2 = as_word(w1), as_word(w2)
    return len(w1) == len(w2) and any(r == w2 for r in rotations(w1))


def least_rotation(w: WordLike) -> Word:
    """Lexicographically least rotation (canonical representative of the cyclic class)."""
    return min(rotations(w))


def is_power_of_rotation(w: WordLike, pi: WordLike) -> bool:
    """True iff ``w`` is ``r^k`` (k >= 1) for some cyclic rotation ``r`` of ``pi``."""
    w, pi = as_word(w), as_word(pi)
    if not w or len(w) % len(pi):
        return False
    return cyclically_equal(primitive_root(w), primitive_root(pi)) and len(primitive_root(pi)) == len(pi)


def lyndon_words(alphabet: int, max_length: int) -> Iterator[Word]:
    """Lyndon words (simple and least in their cyclic class), Duval's order.

    Generated in lexicographic order over all lengths ``1..max_length``.
    """
    if alphabet < 1 or max_length < 1:
        return
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(w)
        m = len(w)
        while len(w) < max_length:
            w.append(w[len(w) - m])
        while w and w[-1] == alphabet - 1:
            w.pop()


def necklaces(alphabet: int, max_length: int) -> Iterator[Word]:
    """Least rotations of every word of length ``1..max_length``.

    A necklace of length ``L`` is ``u^(L/|u|)`` for a Lyndon word ``u`` whose
    length divides ``L``.
    """
    lyn = list(lyndon_words(alphabet, max_length))
    for length in range(1, max_length + 1):
        for u in lyn:
            if length % len(u) == 0:
                yield u * (length // len(u))


# -- white/black classification -------------------------------------------------


@dataclass(frozen=True)
class White:
    a: Word
    k: int
    b: Word

    is_white = True


@dataclass(frozen=True)
class Black:
    is_white = False


def _check_pi(pi: WordLike) -> Word:
    pi = as_word(pi)
    if not pi:
        raise InvalidInput("pi must be nonempty")
    if not is_simple(pi):
        raise InvalidInput(f"pi must be simple, got {word_str(pi)}")
    return pi


def classify(w: WordLike, pi: WordLike, M: int) -> Union[White, Black]:
    """Decompose ``w = a pi^k b`` with ``|a| <= n-1``, ``|b| <= M``, if possible.

    Candidates are tried by increasing ``|a|`` and then increasing ``|b|``,
    which makes the returned witness deterministic.
    """
    w, pi = as_word(w), _check_pi(pi)
    if M < 0:
        raise InvalidInput("M must be nonnegative")
    n, L = len(pi), len(w)
    for la in range(min(n - 1, L) + 1):
        for lb in range(min(M, L - la) + 1):
            mid = L - la - lb
            if mid % n:
                continue
            k = mid // n
            if w[la:la + mid] == pi * k:
                return White(w[:la], k, w[la + mid:])
    return Black()


def is_black(w: WordLike, pi: WordLike, M: int) -> bool:
    return not classify(w, pi, M).is_white


# -- partition into pi-powers and black words -------------------------------------


@dataclass(frozen=True)
class Segment:
    word: Word
    color: str  # "white" or "black"
    padded: bool = False
    trailing: bool = False

    def __len__(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class Partition:
    segments: tuple[Segment, ...]
    pi: Word
    n: int
    M: int
    l: int
    N: int

    def words(self) -> list[Word]:
        return [s.word for s in self.segments]

    def reassemble(self) -> Word:
        return tuple(c for s in self.segments for c in s.word)


def partition_parameters(n: int, M: int) -> tuple[int, int]:
    """``l`` = least integer with ``l n > 2n + M``; ``N = (l + 1) n + M``."""
    l = (2 * n + M) // n + 1
    return l, (l + 1) * n + M


def spot_powers(w: WordLike, pi: WordLike, l: int) -> list[tuple[int, int]]:
    """Greedy left-to-right spotting of maximal powers ``pi^k`` with ``k >= l``.

    Returns ``(start, k)`` pairs; the spotted powers are disjoint and in order.
    """
    w, pi = as_word(w), as_word(pi)
    n = len(pi)
    # one character per letter, so str.find does the occurrence search
    s, p = _encode(w), _encode(pi)
    out = []
    i = s.find(p)
    while i != -1 and i + n * l <= len(s):
        k = 1
        while s.startswith(p, i + k * n):
            k += 1
        if k >= l:
            out.append((i, k))
            i = s.find(p, i + k * n)
        else:
            i = s.find(p, i + 1)
    return out


def _encode(w: Word) -> str:
    return "".join(map(chr, w))


def _split_long(x: Word, N: int) -> list[Word]:
    """Cut ``x`` (``|x| >= N``) into ``|x| // N`` pieces of lengths in ``[N, 2N)``."""
    count = len(x) // N
    base, extra = divmod(len(x), count)
    pieces, pos = [], 0
    for j in range(count):
        size = base + (1 if j < extra else 0)
        pieces.append(x[pos:pos + size])
        pos += size
    return pieces


def partition(w: WordLike, pi: WordLike, M: int) -> Partition:
    """Split ``w`` into powers of ``pi`` separated by black words.

    Construction, for ``n = |pi|`` and ``l, N`` from :func:`partition_parameters`:

    * spot maximal powers ``pi^k`` with ``k >= l`` greedily from the left;
    * a gap of length ``>= N`` is cut into black pieces of length in ``[N, 2N)``;
    * a shorter gap between two spotted powers is padded to ``pi x pi^(l-1)``,
      taking one ``pi`` from the power on its left and ``l - 1`` copies from the
      power on its right. A power with ``k = l`` may be consumed entirely by
      padding from both sides; its neighbours then become adjacent black words.

    The word is finite, so two segments get special treatment: the first word
    (a gap before the first spotted power that is shorter than ``N``) may be
    short, and a trailing gap shorter than ``N`` after the last spotted power
    has no right neighbour to borrow from. It is kept as a final black segment
    flagged ``trailing`` and is exempt from the lower length bound.
    """
    w, pi = as_word(w), _check_pi(pi)
    if M < 0:
        raise InvalidInput("M must be nonnegative")
    n = len(pi)
    l, N = partition_parameters(n, M)
    powers = spot_powers(w, pi, l)

    # gaps[i] sits before powers[i]; gaps[-1] is the trailing gap
    ks = [k for _, k in powers]
    gaps: list[Word] = []
    pos = 0
    for start, k in powers:
        gaps.append(w[pos:start])
        pos = start + k * n
    gaps.append(w[pos:])

    # decide padding first, so borrowed copies come out of the powers
    pad = [False] * len(gaps)
    for i in range(1, len(gaps) - 1):
        if len(gaps[i]) < N:
            pad[i] = True
            ks[i - 1] -= 1
            ks[i] -= l - 1

    segments: list[Segment] = []

    def emit_gap(i: int) -> None:
        x = gaps[i]
        last = i == len(gaps) - 1
        if not x:
            return
        if pad[i]:
            segments.append(Segment(pi + x + pi * (l - 1), "black", padded=True))
        elif len(x) >= N:
            segments.extend(Segment(p, "black") for p in _split_long(x, N))
        else:
            # short first word, or short trailing remainder
            segments.append(Segment(x, "black", trailing=last and i > 0))

    for i in range(len(powers)):
        emit_gap(i)
        if ks[i] > 0:
            segments.append(Segment(pi * ks[i], "white"))
    emit_gap(len(gaps) - 1)
    return Partition(tuple(segments), pi, n, M, l, N)


def check_partition(part: Partition, w: WordLike) -> list[str]:
    """List every violated partition property (empty when all hold).

    Checks reassembly and, with the finite-word conventions of :func:`partition`:
    (a) a black first segment has length ``<= 2N``; (b) white segments are
    nonempty powers of ``pi`` and never adjacent; (c) every other black segment
    has length in ``[n + M, 2N]``, except that a ``trailing`` one only needs
    length ``<= 2N``.
    """
    w = as_word(w)
    problems = []
    if part.reassemble() != w:
        problems.append("segments do not reassemble to the input word")
    segs = part.segments
    n, M, N, pi = part.n, part.M, part.N, part.pi
    for idx, s in enumerate(segs):
        if s.color == "white":
            k = len(s.word) // n
            if k < 1 or s.word != pi * k:
                problems.append(f"segment {idx}: white segment is not a power of pi")
            if idx > 0 and segs[idx - 1].color == "white":
                problems.append(f"segment {idx}: two adjacent white segments")
        else:
            L = len(s.word)
            if idx == 0 or s.trailing:
                if L > 2 * N:
                    problems.append(f"segment {idx}: length {L} > 2N = {2 * N}")
            elif not (n + M <= L <= 2 * N):
                problems.append(f"segment {idx}: black length {L} outside [{n + M}, {2 * N}]")
    return problems
