#!/usr/bin/env python3
"""CPython reference draws for the interpreter's random module.
Writes ../data/random_golden.json."""
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
SCRIPT = """
out = []
out.append([random.random() for _ in range(5)])
out.append([random.randint(1, 100) for _ in range(10)])
out.append([random.randrange(0, 1000, 7) for _ in range(5)])
out.append(random.choice(["a", "b", "c", "d", "e"]))
xs = list(range(10))
random.shuffle(xs)
out.append(xs)
out.append(random.sample(range(100), 6))
out.append([random.uniform(-2, 3) for _ in range(3)])
out.append([random.gauss(0, 1) for _ in range(4)])
out.append(random.getrandbits(60))
"""


def draws(seed):
    random.seed(seed)
    g = {"random": random}
    exec(SCRIPT, g)
    return g["out"]


def main():
    cases = [{"seed": s, "draws": draws(s)} for s in (42, 0, 12345678901234567890)]
    doc = {"script": "import random\n" + SCRIPT.lstrip("\n"), "cases": cases}
    (HERE.parent / "data" / "random_golden.json").write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
