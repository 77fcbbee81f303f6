#!/usr/bin/env python3
"""Reference operation counts: runs each program under CPython with every
executed statement and every evaluated (non-store) expression node counted
once. The pieces of an f-string (literal text and the FormattedValue
wrappers) are not counted separately; only the JoinedStr and the
expressions inside the braces are. Writes ../data/op_counts.json.
"""
import ast
import json
from pathlib import Path

HERE = Path(__file__).resolve().parent

PROGRAMS = [
    "x = 1",
    "x = 1 + 2 * 3",
    "x = [1, 2, 3]\ny = x[1:]",
    "d = {'a': 1, 'b': 2}\nv = d['a'] + d.get('b')",
    "t = 0\nfor i in range(10):\n    t = t + i",
    "t = 0\nfor i in range(5):\n    if i % 2 == 0:\n        t += i\n    else:\n        continue",
    "n = 0\nwhile n < 7:\n    n += 1",
    "def f(a, b=2):\n    return a * b\ny = f(3) + f(1, b=4)",
    "xs = [i * i for i in range(6) if i > 1]",
    "a = 1 < 2 < 3\nb = 0 and 1/0\nc = 1 or 1/0",
    "s = 'abc'\nu = s.upper()\nn = len(s)",
    "def fib(n):\n    if n < 2:\n        return n\n    return fib(n - 1) + fib(n - 2)\nr = fib(8)",
    "m = {k: k + 1 for k in range(4)}\nq = sorted(m, key=lambda k: -m[k])",
    "try:\n    z = 1 // 0\nexcept ZeroDivisionError:\n    z = -1",
    "x = 5\nx = x if x > 3 else -x\ny = -x\nz = not y",
    "try:\n    v = [1][3]\nexcept IndexError as e:\n    v = 0\n    w = str(e)",
    "total = sum([len(str(i)) for i in range(12)])\nprint(f'{total} digits')",
    "acc = []\nfor i in range(3):\n    for j in range(i):\n        acc.append((i, j))",
]


class Counter(ast.NodeTransformer):
    def generic_visit(self, node):
        super().generic_visit(node)
        return node

    def visit(self, node):
        if isinstance(node, ast.JoinedStr):
            node.values = [ast.FormattedValue(value=self.visit(v.value), conversion=v.conversion,
                                              format_spec=v.format_spec)
                           if isinstance(v, ast.FormattedValue) else v for v in node.values]
            return self._wrap(node)
        node = super().visit(node)
        return self._wrap(node)

    def _wrap(self, node):
        if isinstance(node, ast.expr) and not isinstance(getattr(node, "ctx", None), (ast.Store, ast.Del)):
            # (__tick(), node)[1]: counted on entry, so a raising node still counts
            tick = ast.Call(func=ast.Name(id="__tick", ctx=ast.Load()), args=[], keywords=[])
            pair = ast.Tuple(elts=[tick, node], ctx=ast.Load())
            return ast.copy_location(ast.Subscript(value=pair, slice=ast.Constant(1), ctx=ast.Load()), node)
        return node


def instrument(tree):
    class Stmts(ast.NodeTransformer):
        def _wrap_body(self, body):
            out = []
            for s in body:
                s = self.visit(s)
                tick = ast.Expr(ast.Call(func=ast.Name(id="__tick_stmt", ctx=ast.Load()), args=[], keywords=[]))
                out += [ast.copy_location(tick, s), s]
            return out

        def generic_visit(self, node):
            for field in ("body", "orelse", "finalbody"):
                if isinstance(getattr(node, field, None), list) and getattr(node, field) and \
                        isinstance(getattr(node, field)[0], ast.stmt):
                    setattr(node, field, self._wrap_body(getattr(node, field)))
            for h in getattr(node, "handlers", []) or []:
                if h.type is not None:
                    h.type = Counter().visit(h.type)
                h.body = self._wrap_body(h.body)
            for name, value in ast.iter_fields(node):
                if name in ("body", "orelse", "finalbody", "handlers"):
                    continue
                if isinstance(value, ast.AST):
                    setattr(node, name, Counter().visit(value))
                elif isinstance(value, list):
                    setattr(node, name, [Counter().visit(v) if isinstance(v, ast.AST) else v for v in value])
            return node

    tree = Stmts().generic_visit(tree)
    return ast.fix_missing_locations(tree)


def count(src):
    n = [0]

    def tick():
        n[0] += 1

    tree = instrument(ast.parse(src))
    exec(compile(tree, "<p>", "exec"), {"__tick": tick, "__tick_stmt": tick})
    return n[0]


def main():
    out = [{"source": p, "operations": count(p)} for p in PROGRAMS]
    (HERE.parent / "data" / "op_counts.json").write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
