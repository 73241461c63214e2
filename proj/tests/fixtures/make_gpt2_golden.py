"""Reference GPT-2 token ids from the Hugging Face tokenizers BPE, built from the local vocab files."""
import json
import random
import sys

from tokenizers import Tokenizer, decoders, models, pre_tokenizers

data = sys.argv[1] if len(sys.argv) > 1 else "data/gpt2"
out = sys.argv[2] if len(sys.argv) > 2 else "tests/fixtures/gpt2_golden.jsonl"
tok = Tokenizer(models.BPE.from_file(f"{data}/encoder.json", f"{data}/vocab.bpe"))
tok.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
tok.decoder = decoders.ByteLevel()

texts = [
    "Biden is the president of the United States.",
    "Obama is the president of the United States.",
    "Hello world",
    " leading space",
    "trailing spaces   ",
    "multiple   spaces\tand\ttabs\nand\n\nnewlines",
    "Sally Forrest died on March 15.",
    "Prince Harry in attendance for England's crunch match against France.",
    "I'm sure they'll say we've done it, didn't they? She'd know.",
    "Numbers: 1,000 pieces, 3.14159, 2023-10-15, 55-35.",
    "café naïve résumé über",
    "你好，世界",
    "Привет мир",
    "emoji \U0001F600\U0001F680 and — dashes ’quotes’",
    "Key relation: {'subject': ' Sally Forrest', 'relation': ' died on', 'object': ' March 15'}",
    "\nTL;DR:",
    "<mask> is the <mask> of the <mask> <mask>.",
    "aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa",
    "'s 't 're 've 'm 'll 'd 'S 'T",
    "   ",
    "x",
]
rng = random.Random(20231015)
alphabet = "abcdefghijklmnopqrstuvwxyz ABCDEFGHIJ.,;:'!?-0123456789\t\néü世’"
for _ in range(300):
    n = rng.randint(1, 40)
    texts.append("".join(rng.choice(alphabet) for _ in range(n)))

with open(out, "w", encoding="utf-8") as f:
    for t in texts:
        ids = tok.encode(t).ids
        f.write(json.dumps({"text": t, "ids": ids}, ensure_ascii=False) + "\n")
