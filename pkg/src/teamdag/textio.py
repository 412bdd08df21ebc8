"""Line-oriented text format for game trees and team decision problems.

Game tree::

    game <name> <num_players> <minus players, comma separated>
    node <id> terminal <parent> <return per player, comma separated>
    node <id> chance <parent> <child>:<label>:<prob> ...
    node <id> decision <parent> <player> <infoset> <child>:<label> ...
    infoset <id> <player> <nodes, comma separated> <key>

Team decision problem::

    tfsdp <name>
    node <id> observation|decision|terminal <parent> <origin> <infoset> <child>:<label> ...
    infoset <id> <player> <nodes, comma separated>

Labels, names and keys are percent-encoded, so every field is free of spaces
and colons. Numbers use ``repr`` so floats survive the round trip exactly.
Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import ast
from pathlib import Path
from urllib.parse import quote, unquote

from .efg import CHANCE, DECISION, KIND_NAMES, TERMINAL, GameTree
from .tfsdp import TeamTFSDP

_KIND = {v: k for k, v in KIND_NAMES.items()}
_TF_NAMES = {TERMINAL: "terminal", CHANCE: "observation", DECISION: "decision"}
_TF_KIND = {v: k for k, v in _TF_NAMES.items()}


class ParseError(ValueError):
    def __init__(self, line_no: int, msg: str):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


def _q(s) -> str:
    return quote(str(s), safe="")


def _ints(field: str) -> list:
    return [int(x) for x in field.split(",")] if field else []


def _records(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield no, line.split()


def dump_game(tree: GameTree) -> str:
    out = [f"game {_q(tree.name)} {tree.num_players} {','.join(map(str, sorted(tree.minus)))}"]
    for v, k in enumerate(tree.kind):
        head = f"node {v} {KIND_NAMES[k]} {tree.parent[v]}"
        if k == TERMINAL:
            out.append(f"{head} {','.join(repr(float(r)) for r in tree.returns[v])}")
        elif k == CHANCE:
            kids = " ".join(f"{c}:{_q(a)}:{float(p)!r}"
                            for c, a, p in zip(tree.children[v], tree.labels[v], tree.probs[v]))
            out.append(f"{head} {kids}")
        else:
            kids = " ".join(f"{c}:{_q(a)}" for c, a in zip(tree.children[v], tree.labels[v]))
            out.append(f"{head} {tree.player[v]} {tree.infoset[v]} {kids}")
    for i, members in enumerate(tree.infosets):
        key = tree.infoset_key[i] if i < len(tree.infoset_key) else None
        out.append(f"infoset {i} {tree.infoset_player[i]} {','.join(map(str, members))} {_q(repr(key))}")
    return "\n".join(out) + "\n"


def load_game(text: str) -> GameTree:
    tree = None
    for no, f in _records(text):
        try:
            if f[0] == "game":
                tree = GameTree(num_players=int(f[2]), minus=frozenset(_ints(f[3]) if len(f) > 3 else []),
                                name=unquote(f[1]))
                continue
            if tree is None:
                raise ParseError(no, "missing 'game' header")
            if f[0] == "node":
                v, kind, parent = int(f[1]), _KIND[f[2]], int(f[3])
                if v != len(tree.kind):
                    raise ParseError(no, f"node ids must be consecutive, expected {len(tree.kind)}")
                if kind == TERMINAL:
                    tree.add_node(TERMINAL, parent=parent, ret=tuple(float(x) for x in f[4].split(",")))
                elif kind == CHANCE:
                    tree.add_node(CHANCE, parent=parent)
                    for item in f[4:]:
                        c, a, p = item.split(":")
                        tree.children[v].append(int(c))
                        tree.labels[v].append(unquote(a))
                        tree.probs[v].append(float(p))
                else:
                    tree.add_node(DECISION, player=int(f[4]), parent=parent)
                    tree.infoset[v] = int(f[5])
                    for item in f[6:]:
                        c, a = item.split(":")
                        tree.children[v].append(int(c))
                        tree.labels[v].append(unquote(a))
            elif f[0] == "infoset":
                i = int(f[1])
                if i != len(tree.infosets):
                    raise ParseError(no, f"infoset ids must be consecutive, expected {len(tree.infosets)}")
                tree.infoset_player.append(int(f[2]))
                tree.infosets.append(_ints(f[3]))
                tree.infoset_key.append(ast.literal_eval(unquote(f[4])) if len(f) > 4 else None)
            else:
                raise ParseError(no, f"unknown record {f[0]!r}")
        except ParseError:
            raise
        except (IndexError, KeyError, ValueError, SyntaxError) as e:
            raise ParseError(no, f"malformed record: {e}") from None
    if tree is None:
        raise ParseError(0, "empty input")
    return tree


def dump_tfsdp(t: TeamTFSDP) -> str:
    out = [f"tfsdp {_q(t.name)}"]
    for v, k in enumerate(t.kind):
        kids = " ".join(f"{c}:{_q(a)}" for c, a in zip(t.children[v], t.labels[v]))
        out.append(f"node {v} {_TF_NAMES[k]} {t.parent[v]} {t.origin[v]} {t.infoset[v]} {kids}".rstrip())
    for i, members in enumerate(t.infosets):
        out.append(f"infoset {i} {t.infoset_player[i]} {','.join(map(str, members))}")
    return "\n".join(out) + "\n"


def load_tfsdp(text: str) -> TeamTFSDP:
    t = None
    pending = []
    for no, f in _records(text):
        try:
            if f[0] == "tfsdp":
                t = TeamTFSDP(name=unquote(f[1]) if len(f) > 1 else "tfsdp")
                continue
            if t is None:
                raise ParseError(no, "missing 'tfsdp' header")
            if f[0] == "node":
                v = int(f[1])
                if v != len(t.kind):
                    raise ParseError(no, f"node ids must be consecutive, expected {len(t.kind)}")
                t.kind.append(_TF_KIND[f[2]])
                t.parent.append(int(f[3]))
                t.origin.append(int(f[4]))
                t.infoset.append(int(f[5]))
                kids = [item.split(":") for item in f[6:]]
                t.children.append([int(c) for c, _ in kids])
                t.labels.append([unquote(a) for _, a in kids])
            elif f[0] == "infoset":
                if int(f[1]) != len(pending):
                    raise ParseError(no, f"infoset ids must be consecutive, expected {len(pending)}")
                pending.append((int(f[2]), _ints(f[3])))
            else:
                raise ParseError(no, f"unknown record {f[0]!r}")
        except ParseError:
            raise
        except (IndexError, KeyError, ValueError) as e:
            raise ParseError(no, f"malformed record: {e}") from None
    if t is None:
        raise ParseError(0, "empty input")
    t.infoset_player = [p for p, _ in pending]
    t.infosets = [m for _, m in pending]
    return t


def read_game(path) -> GameTree:
    return load_game(Path(path).read_text())


def write_game(tree: GameTree, path) -> None:
    Path(path).write_text(dump_game(tree))


def read_tfsdp(path) -> TeamTFSDP:
    return load_tfsdp(Path(path).read_text())


def write_tfsdp(t: TeamTFSDP, path) -> None:
    Path(path).write_text(dump_tfsdp(t))
