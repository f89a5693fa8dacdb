"""Writes the toy lyric corpus used by the lyricar integration tests.

Paragraphs are assembled from phrase banks so that line counts, vocabulary
and end rhymes vary across the corpus. About half carry a Chinese reference
translation for BLEU.
"""

import json
import random
import sys

SUBJECTS = ["I", "you", "we", "the night", "my heart", "the river", "a stranger", "the city",
            "your shadow", "the morning", "an old song", "the wind"]
VERBS = ["remembers", "is calling", "keeps dreaming of", "runs away from", "holds on to",
         "whispers about", "waits for", "burns like", "dances with", "forgets"]
OBJECTS = ["the light", "tonight", "the sea", "a melody", "the rain", "forever", "the fire",
           "the stars above", "a broken promise", "the open road", "the silence", "home"]
FILLERS = ["oh", "yeah", "baby", "again", "so slowly", "all alone", "once more", "in the dark"]
RARE = ["incandescent", "labyrinthine", "ephemeral", "kaleidoscopic", "melancholia",
        "serendipitous", "iridescent", "unfathomable"]

ZH = list("月光花香歌唱心中爱你天空星星夜晚风雨梦想远方回家火焰海洋城市声音时间永远孤单等待燃烧舞蹈忘记")


def line(rng, hard):
    parts = [rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(OBJECTS)]
    if hard and rng.random() < 0.6:
        parts.insert(2, rng.choice(RARE))
    if rng.random() < 0.3:
        parts.append(rng.choice(FILLERS))
    text = " ".join(parts)
    return text[0].upper() + text[1:]


def reference(rng, n_lines):
    out = []
    for _ in range(n_lines):
        out.append("".join(rng.choice(ZH) for _ in range(rng.randint(5, 9))))
    return " / ".join(out)


def main(path):
    rng = random.Random(20240611)
    with open(path, "w", encoding="utf-8") as f:
        for i in range(60):
            hard = i % 3 == 2
            n = rng.randint(2, 6) if not hard else rng.randint(4, 8)
            rec = {"id": f"toy{i + 1:03d}", "lang": "en", "lines": [line(rng, hard) for _ in range(n)]}
            if i % 2 == 0:
                rec["reference"] = reference(rng, n)
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/lyricar/tests/fixtures/toy_corpus.jsonl")
