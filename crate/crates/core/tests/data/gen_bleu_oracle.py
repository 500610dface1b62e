"""Regenerates bleu_oracle.json from the reference sacrebleu package.

    pip install sacrebleu==2.6.0
    python3 gen_bleu_oracle.py > bleu_oracle.json
"""
import json
import random

import sacrebleu
from sacrebleu.tokenizers.tokenizer_13a import Tokenizer13a

rng = random.Random(20221017)

NAMES = ["Fred", "Anna", "Tom", "Someone_A", "Someone_B", "Kim"]
VERBS = ["wakes up", "misses", "buys", "finds", "loses", "drives", "eats", "is stolen", "cannot find", "goes to"]
OBJS = ["his bus", "the car", "her tools", "Something_A", "a 3.5 pound cake", "the store, again", "Somewhere_A",
        "$20", "the dog's bone", "1,000 apples"]
RELS = [">Causes/Enables>", ">Motivates>", ">Enables>", ">Results in>", ">Causes>"]


def statement():
    return f"{rng.choice(NAMES)} {rng.choice(VERBS)} {rng.choice(OBJS)}"


def rule():
    return f"{statement()} {rng.choice(RELS)} {statement()}"


def perturb(text):
    words = text.split()
    ops = rng.randint(0, 4)
    for _ in range(ops):
        op = rng.random()
        if op < 0.3 and len(words) > 1:
            del words[rng.randrange(len(words))]
        elif op < 0.6:
            words.insert(rng.randrange(len(words) + 1), rng.choice(["the", "a", "very", "then", "late", "."]))
        elif words:
            words[rng.randrange(len(words))] = rng.choice(["Fred", "bus", "tools", "was", "home"])
    return " ".join(words)


pairs = [
    ("Fred wakes up late >Causes/Enables> Fred misses his bus",
     "Fred wakes up late >Causes/Enables> Fred misses his bus"),
    ("the the the the", "the cat sat down"),
    ("", "a b c d"),
    ("a b", "a b c d e f"),
    ("Hello, world!", "Hello, world!"),
    ("He paid 3.5 dollars, then left.", "He paid 3.5 dollars , then left ."),
    ("They were stolen the night before >Causes/Enables> I could not find my tools",
     "Something_A is stolen >Causes/Enables> Someone_A cannot find Something_A"),
    ("It costs $1,000.00 (roughly)...", "It costs $1,000.00 (roughly)."),
    ("x-ray 2-3 weeks A&amp;B &quot;quoted&quot;", "x-ray 2-3 weeks A&B \"quoted\""),
    ("one", "one"),
]
while len(pairs) < 50:
    ref = rule()
    hyp = perturb(ref) if rng.random() < 0.8 else rule()
    pairs.append((hyp, ref))

tok = Tokenizer13a()
out = {
    "sacrebleu_version": sacrebleu.__version__,
    "pairs": [
        {"hyp": h, "ref": r, "bleu": sacrebleu.corpus_bleu([h], [[r]]).score}
        for h, r in pairs
    ],
    "corpus_bleu": sacrebleu.corpus_bleu([h for h, _ in pairs], [[r for _, r in pairs]]).score,
    "tokenize_13a": [
        {"text": t, "tokens": tok(t.rstrip()).split()}
        for t in ["Hello, world!", "", "3.5 points", "a-b 1-2 x,y 1,5 end.", "(quoted) \"text\" {braces} [sq]",
                  "A&amp;B &lt;tag&gt; 5.", "It's 10:30 p.m., ok?", "  spaced   out  ", "e.g. U.S.A."]
    ],
}
print(json.dumps(out, indent=1, ensure_ascii=False))
