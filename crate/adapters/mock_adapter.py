#!/usr/bin/env python3
"""Deterministic stdlib-only stand-in for a real model adapter.

Speaks the JSON-lines protocol documented in the backend adapter module:
one request object per stdin line, one reply object per stdout line.
Useful for smoke-testing the full pipeline where a GPU model would
normally sit: answers are canned per prompt family, activations carry a
learnable context-presence signal from layer 1 up, and injected vectors
shift that signal so steering has something to flip.

Behavior is a pure function of the request bytes. No state, no clock.
"""

import hashlib
import json
import re
import sys

NAME = "mock"
N_LAYERS = 4
HIDDEN_DIM = 32

# Follow-the-context signal planted in activations: coordinate 0 carries
# +SIGNAL on context-bearing prompts at layers >= 1. Injection shifts it.
SIGNAL = 3.0
THRESHOLD = 1.5

FAKE_CITIES = [
    "Belmora", "Quintara", "Veleth", "Norwick",
    "Ashvale", "Corvenna", "Drelby", "Marisport",
]
FAKE_PEOPLE = [
    "Harlan Voss", "Ilka Brandt", "Omar Teague", "Ruth Calloway",
    "Stellan Okafor", "Greta Lindh", "Paulo Ferreira", "Wanda Kessler",
]

# Parametric solutions, keyed by the function name in the problem prompt.
SOLUTIONS = {
    "count_items": "def count_items(xs):\n    return len(xs)",
    "total": "def total(xs):\n    return sum(xs)",
    "sort_words": "def sort_words(ws):\n    return sorted(ws)",
    "magnitude": "def magnitude(x):\n    return abs(x)",
    "concat_all": (
        "def concat_all(parts):\n"
        "    out = ''\n"
        "    for p in parts:\n"
        "        out += p\n"
        "    return out"
    ),
    "add": "def add(a, b):\n    return a + b",
}

# Context-following rewrites that avoid a deprecated callable.
AVOID_FUNCTION = {
    ("count_items", "len"): (
        "def count_items(xs):\n"
        "    n = 0\n"
        "    for _ in xs:\n"
        "        n += 1\n"
        "    return n"
    ),
    ("total", "sum"): (
        "def total(xs):\n"
        "    acc = 0\n"
        "    for x in xs:\n"
        "        acc = acc + x\n"
        "    return acc"
    ),
    ("sort_words", "sorted"): (
        "def sort_words(ws):\n"
        "    out = list(ws)\n"
        "    out.sort()\n"
        "    return out"
    ),
    ("magnitude", "abs"): (
        "def magnitude(x):\n"
        "    return -x if x < 0 else x"
    ),
}

# Context-following rewrites that avoid a deprecated operator.
AVOID_OPERATOR = {
    ("concat_all", "+="): (
        "def concat_all(parts):\n"
        "    return ''.join(parts)"
    ),
    ("add", "+"): "def add(a, b):\n    return sum([a, b])",
}


def digest(*parts):
    h = hashlib.sha256()
    for p in parts:
        h.update(str(p).encode("utf-8"))
        h.update(b"\x1f")
    return h.digest()


def pick(options, *seed_parts):
    return options[digest(*seed_parts)[0] % len(options)]


def split_prompt(prompt):
    """(context lines, query line); context is empty on bare queries."""
    lines = [l for l in prompt.splitlines() if l.strip()]
    if not lines:
        return [], ""
    return lines[:-1], lines[-1]


def function_name(query):
    m = re.search(r"function (\w+)\(", query)
    return m.group(1) if m else None


def parametric_answer(query):
    fn = function_name(query)
    if fn in SOLUTIONS:
        return SOLUTIONS[fn]
    if "capital" in query:
        return pick(FAKE_CITIES, "city", query) + "."
    if "gold medal" in query:
        return pick(FAKE_PEOPLE, "person", query) + "."
    return pick(FAKE_CITIES, "fallback", query) + "."


def following_answer(context, query):
    """The answer a context-believing model would give, or None."""
    if not context:
        return None
    statement = context[0]
    fn = function_name(query)
    if fn is None:
        # QA: restating the context line contains the conflicting entity.
        return statement
    m = re.search(r"operator (\S+) has been deprecated", statement)
    if m:
        return AVOID_OPERATOR.get((fn, m.group(1)))
    m = re.search(r"function (\w+) has been deprecated, but has been replaced", statement)
    if m and fn in SOLUTIONS:
        target = m.group(1)
        return re.sub(r"\b%s\b" % re.escape(target), "new_" + target, SOLUTIONS[fn])
    m = re.search(r"function (\w+) has been deprecated", statement)
    if m:
        return AVOID_FUNCTION.get((fn, m.group(1)))
    return None


def generate(prompt, shift=0.0):
    context, query = split_prompt(prompt)
    if not context:
        return parametric_answer(query)
    followed = following_answer(context, query)
    code_task = function_name(query) is not None
    base = digest("gen", prompt)[0] % 4
    score = (SIGNAL if base >= 2 else 0.0) + shift
    if score > THRESHOLD and followed is not None:
        return followed
    if base == 3 and not code_task and shift == 0.0:
        return "I cannot determine that."
    return parametric_answer(query)


def capture(prompt, layers):
    context, _ = split_prompt(prompt)
    rows = []
    for layer in layers:
        row = []
        for i in range(HIDDEN_DIM):
            b = digest("act", prompt, layer, i)[0]
            row.append(round(b / 255.0 - 0.5, 6))
        if layer >= 1 and context:
            row[0] += SIGNAL
        rows.append(row)
    return rows


def injected_shift(spec):
    sign = 1.0 if spec.get("sign") == "plus" else -1.0
    vector = spec.get("vector") or [0.0]
    return sign * float(spec.get("coefficient", 1.0)) * float(vector[0])


def tokenize(text):
    return text.split()


def attention(prompt, response, kind):
    prompt_tokens = tokenize(prompt) or [""]
    if kind == "cross":
        query_tokens = tokenize(response) or [""]
    else:
        query_tokens = prompt_tokens
    maps = []
    for layer in range(N_LAYERS):
        weights = []
        for i in range(len(query_tokens)):
            row = []
            for j in range(len(prompt_tokens)):
                b = digest("attn", prompt, kind, layer, i, j)[0]
                row.append(round(b / 255.0, 6))
            weights.append(row)
        maps.append({
            "kind": kind,
            "layer": layer,
            "weights": weights,
            "query_tokens": query_tokens,
            "key_tokens": prompt_tokens,
        })
    return maps


def handle(request):
    op = request.get("op")
    if op == "describe":
        return {
            "name": NAME,
            "n_layers": N_LAYERS,
            "hidden_dim": HIDDEN_DIM,
            "deterministic": True,
        }
    if op == "generate":
        return {"text": generate(request["prompt"])}
    if op == "capture":
        return {"rows": capture(request["prompt"], request["layers"])}
    if op == "generate_injected":
        shift = injected_shift(request["spec"])
        return {"text": generate(request["prompt"], shift=shift)}
    if op == "attention":
        return {"maps": attention(request["prompt"], request["response"], request["kind"])}
    if op == "shutdown":
        return None
    return {"error": "unknown op %r" % op}


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as e:
            print(json.dumps({"error": "bad request: %s" % e}), flush=True)
            continue
        try:
            reply = handle(request)
        except Exception as e:  # surface, never crash the stream
            reply = {"error": "%s: %s" % (type(e).__name__, e)}
        if reply is None:
            break
        print(json.dumps(reply), flush=True)


if __name__ == "__main__":
    main()
