"""Dictionary automata and the ambiguity table.

``Dawg`` is a minimal acyclic word automaton built incrementally over the
sorted word list (suffix sharing via a registry of already-minimized
states), so construction never materializes the full trie.  The two DAWG
dictionaries and the plain user word list all use it; ambiguity rules are
parsed here but applied only as rescoring *suggestions* downstream, never
as silent substitutions.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .errors import DataError, FormatError, ParseError

DAWG_MAGIC = b"GDAW"
DAWG_VERSION = 1


@dataclass(frozen=True)
class DawgNode:
    final: bool
    edges: tuple[tuple[str, int], ...]  # (glyph, target id), sorted by glyph


@dataclass
class Dawg:
    """Minimal acyclic automaton over a finite word set.

    Nodes are stored in a canonical preorder (root first, edges in glyph
    order), so two automata accepting the same language compare equal.
    """

    nodes: list[DawgNode] = field(default_factory=list)
    root: int = 0

    def __post_init__(self):
        if not self.nodes:
            self.nodes = [DawgNode(final=False, edges=())]

    def __contains__(self, word: str) -> bool:
        node = self.nodes[self.root]
        for glyph in word:
            target = None
            for g, t in node.edges:
                if g == glyph:
                    target = t
                    break
            if target is None:
                return False
            node = self.nodes[target]
        return node.final

    def __len__(self) -> int:
        return len(self.nodes)

    def words(self) -> list[str]:
        """All accepted words in lexicographic order."""
        out: list[str] = []
        stack: list[tuple[int, str]] = [(self.root, "")]
        while stack:
            node_id, prefix = stack.pop()
            node = self.nodes[node_id]
            if node.final:
                out.append(prefix)
            for g, t in reversed(node.edges):
                stack.append((t, prefix + g))
        return out


class _BuildNode:
    __slots__ = ("final", "edges", "frozen_id")

    def __init__(self):
        self.final = False
        self.edges: dict[str, _BuildNode] = {}
        self.frozen_id: int | None = None

    def signature(self):
        return (self.final, tuple((g, id(t)) for g, t in sorted(self.edges.items())))


def build_dawg(words: list[str], alphabet: set[str] | None = None) -> Dawg:
    """Build the minimal automaton for a word set.

    Duplicates are dropped and the input is sorted internally.  With an
    ``alphabet`` given, a word using any other glyph is an error naming the
    word.
    """
    unique = sorted(set(words))
    if alphabet is not None:
        for w in unique:
            for glyph in w:
                if glyph not in alphabet:
                    raise DataError(
                        f"word {w!r} uses glyph {glyph!r} outside the alphabet"
                    )

    root = _BuildNode()
    register: dict[tuple, _BuildNode] = {}
    path: list[_BuildNode] = [root]
    prev = ""

    def freeze_tail(word: str, depth: int) -> None:
        # minimize the suffix of `word` below `depth`, deepest node first
        for d in range(len(word), depth, -1):
            parent, child = path[d - 1], path[d]
            sig = child.signature()
            rep = register.get(sig)
            if rep is None:
                register[sig] = child
            else:
                parent.edges[word[d - 1]] = rep
                path[d] = rep

    for w in unique:
        cp = 0
        limit = min(len(w), len(prev))
        while cp < limit and w[cp] == prev[cp]:
            cp += 1
        freeze_tail(prev, cp)
        del path[cp + 1 :]
        node = path[cp]
        for glyph in w[cp:]:
            nxt = _BuildNode()
            node.edges[glyph] = nxt
            path.append(nxt)
            node = nxt
        node.final = True
        prev = w
    freeze_tail(prev, 0)

    # flatten to canonical ids, iteratively (words can be arbitrarily long)
    nodes: list[DawgNode] = []

    def assign_id(bn: _BuildNode) -> int:
        if bn.frozen_id is None:
            bn.frozen_id = len(nodes)
            nodes.append(DawgNode(final=False, edges=()))  # placeholder
        return bn.frozen_id

    assign_id(root)
    stack = [root]
    done: set[int] = set()
    while stack:
        bn = stack.pop()
        if id(bn) in done:
            continue
        done.add(id(bn))
        ordered = sorted(bn.edges.items())
        nodes[bn.frozen_id] = DawgNode(
            final=bn.final, edges=tuple((g, assign_id(t)) for g, t in ordered)
        )
        stack.extend(t for _, t in reversed(ordered))
    return Dawg(nodes=nodes, root=0)


def serialize_dawg(d: Dawg) -> bytes:
    """GDAW binary: magic, u32 version, u32 node count, u32 root, then per
    node u32 flags (bit 0 = final), u32 edge count and (u32 glyph codepoint,
    u32 target) pairs, little-endian."""
    out = [struct.pack("<4sIII", DAWG_MAGIC, DAWG_VERSION, len(d.nodes), d.root)]
    for node in d.nodes:
        out.append(struct.pack("<II", 1 if node.final else 0, len(node.edges)))
        for g, t in node.edges:
            out.append(struct.pack("<II", ord(g), t))
    return b"".join(out)


def load_dawg(data: bytes) -> Dawg:
    """Inverse of serialize_dawg; bad magic, version or truncation raise
    FormatError and never yield a partial automaton."""
    try:
        magic, version, count, root = struct.unpack_from("<4sIII", data, 0)
    except struct.error as exc:
        raise FormatError("dawg stream truncated") from exc
    if magic != DAWG_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {DAWG_MAGIC!r}")
    if version != DAWG_VERSION:
        raise FormatError(f"unsupported dawg version {version}")
    off = 16
    nodes: list[DawgNode] = []
    for _ in range(count):
        try:
            flags, n_edges = struct.unpack_from("<II", data, off)
            off += 8
            edges = []
            for _ in range(n_edges):
                code, target = struct.unpack_from("<II", data, off)
                off += 8
                if target >= count:
                    raise FormatError(f"edge target {target} out of range")
                edges.append((chr(code), target))
        except struct.error as exc:
            raise FormatError("dawg stream truncated") from exc
        nodes.append(DawgNode(final=bool(flags & 1), edges=tuple(edges)))
    if off != len(data):
        raise FormatError("trailing bytes after dawg nodes")
    if root >= count:
        raise FormatError(f"root {root} out of range")
    return Dawg(nodes=nodes, root=root)


def parse_wordlist(data: bytes | str) -> list[str]:
    """One word per non-empty line, surrounding whitespace stripped."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8 at byte {exc.start}") from exc
    else:
        text = data
    return [w for w in (line.strip() for line in text.split("\n")) if w]


@dataclass(frozen=True)
class AmbigRule:
    source: tuple[str, ...]
    replacement: tuple[str, ...]
    mandatory: bool = False


@dataclass
class AmbigTable:
    rules: list[AmbigRule] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rules)


def parse_ambigs(data: bytes | str) -> AmbigTable:
    """Parse ambiguity rules: ``n src_1..src_n m dst_1..dst_m [mandatory]``
    per line, space-separated.  An empty file is a valid empty table."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8 at byte {exc.start}") from exc
    else:
        text = data
    rules = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        tokens = line.split()
        try:
            n = int(tokens[0])
            if n < 1:
                raise ParseError("source sequence must be non-empty", line=lineno)
            source = tuple(tokens[1 : 1 + n])
            if len(source) != n:
                raise ParseError(
                    f"expected {n} source glyphs, got {len(source)}", line=lineno
                )
            m = int(tokens[1 + n])
            replacement = tuple(tokens[2 + n : 2 + n + m])
            if len(replacement) != m:
                raise ParseError(
                    f"expected {m} replacement glyphs, got {len(replacement)}",
                    line=lineno,
                )
            rest = tokens[2 + n + m :]
        except (ValueError, IndexError) as exc:
            raise ParseError(f"malformed ambiguity rule: {exc}", line=lineno) from exc
        if len(rest) > 1:
            raise ParseError(f"unexpected trailing fields {rest[1:]}", line=lineno)
        mandatory = False
        if rest:
            if rest[0] not in ("0", "1"):
                raise ParseError(
                    f"mandatory flag must be 0 or 1, got {rest[0]!r}", line=lineno
                )
            mandatory = rest[0] == "1"
        rules.append(AmbigRule(source=source, replacement=replacement, mandatory=mandatory))
    return AmbigTable(rules=rules)


def write_ambigs(table: AmbigTable) -> bytes:
    """Canonical text form of an ambiguity table (inverse of parse_ambigs)."""
    lines = []
    for rule in table.rules:
        parts = [str(len(rule.source)), *rule.source, str(len(rule.replacement)), *rule.replacement]
        if rule.mandatory:
            parts.append("1")
        lines.append(" ".join(parts) + "\n")
    return "".join(lines).encode("utf-8")


def write_wordlist(words: list[str]) -> bytes:
    return "".join(w + "\n" for w in words).encode("utf-8")
