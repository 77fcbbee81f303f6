#!/usr/bin/env python3
"""Captures CPython's stdout for small programs in the supported subset.
Writes ../data/semantics.json."""
import contextlib
import io
import json
from pathlib import Path

HERE = Path(__file__).resolve().parent

PROGRAMS = [
    "print(7 // 2, -7 // 2, 7 % 3, -7 % 3, 2 ** 10, 7 / 2)",
    "print(round(2.5), round(3.5), round(2.675, 2), abs(-3), divmod(-7, 2))",
    "print(int('42') + 1, float('1.5') * 2, str(3) + 'x', bool(''), bool([0]))",
    "xs = [3, 1, 2]\nxs.sort()\nprint(xs, sorted(xs, reverse=True), xs[::-1], xs[1:], len(xs))",
    "d = {'b': 2, 'a': 1}\nd['c'] = 3\nprint(d, list(d.keys()), sorted(d.items()), d.get('z', 0))",
    "s = 'Hello, World'\nprint(s.lower(), s.split(', '), s.replace('l', 'L'), s.startswith('He'), s[::2])",
    "print('{:.3f}|{:>5}|{:<4}|{:05d}'.format(3.14159, 'ab', 'c', 42))",
    "x = 12.5\nname = 'n'\nprint(f'{name}={x:.2f} {x!r} {10 * 3}')",
    "print([i * j for i in range(3) for j in range(3) if i != j])",
    "print({k: len(k) for k in ['a', 'bb', 'ccc']})",
    "def f(*args, **kw):\n    return len(args), sorted(kw)\nprint(f(1, 2, x=3, y=4))",
    "def g(a, b=[]):\n    b.append(a)\n    return b\nprint(g(1), g(2))",
    "t = (1, 2, 3)\na, *rest = t\nprint(a, rest, t.index(2), t.count(3))",
    "try:\n    [][1]\nexcept IndexError as e:\n    print('caught', e)",
    "try:\n    {}['k']\nexcept KeyError as e:\n    print('caught', repr(e))",
    "try:\n    int('x')\nexcept ValueError as e:\n    print(e)",
    "import math\nprint(math.sqrt(2), math.pi, math.floor(-1.5), math.isclose(0.1 + 0.2, 0.3))",
    "import statistics\nprint(statistics.mean([1, 2, 3, 4]), statistics.median([3, 1, 2]), statistics.stdev([1, 2, 3, 4]))",
    "import json\nprint(json.dumps({'a': [1, 2.5, None, True], 'b': 'é'}), json.loads('[1, {\"x\": null}]'))",
    "import json\nprint(json.dumps({'b': 1, 'a': [1, 2]}, indent=2, sort_keys=True))",
    "print(list(zip([1, 2, 3], 'ab')), list(enumerate('xy', 1)), list(map(str, [1, 2])))",
    "print(min([4, 2, 8]), max('abc'), sum([0.1] * 10), any([]), all([]))",
    "print(1e16, 1.5e-7, 0.1 + 0.2, 1 / 3, float('inf'), -0.0, 100.0)",
    "print(repr('a\\'b'), repr(\"q\\n\"), [None, True, 1.0], (1,), ())",
    "n = 0\nwhile True:\n    n += 1\n    if n > 4:\n        break\nprint(n)",
    "print(isinstance(True, int), type(1.0).__name__ if False else 'float', 3 in [1, 2, 3], 'a' not in 'bcd')",
    "xs = list(range(10))\ndel xs[2:5]\nprint(xs, xs.pop(), xs.pop(0), xs)",
    "s = 'a,b,,c'\nprint(s.split(','), ' x '.strip(), '-'.join(['1', '2']), 'abc'.upper().find('C'))",
    "m = [[1, 2], [3, 4]]\nprint([[r[i] for r in m] for i in range(2)], sum([sum(r) for r in m]))",
    "print(sorted(['b', 'A', 'c'], key=lambda s: s.lower()), sorted([(2, 'b'), (1, 'z'), (2, 'a')]))",
    "print(5 if 3 > 2 else 6, 0 or 'x', 1 and 2, not 0, 2 < 3 <= 3)",
    "print(hex(255), bin(5), oct(8), chr(65), ord('a'), 10 ** 18 + 1)",
    "from pathlib import Path\np = Path('a/b/c.tar.gz')\nprint(p.name, p.stem, p.suffix, p.suffixes, p.parent, p.with_suffix('.txt'))",
]


def main():
    out = []
    for src in PROGRAMS:
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            exec(compile(src, "<p>", "exec"), {})
        out.append({"source": src, "stdout": buf.getvalue()})
    (HERE.parent / "data" / "semantics.json").write_text(json.dumps(out, indent=1, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
