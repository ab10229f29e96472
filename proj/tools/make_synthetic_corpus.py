#!/usr/bin/env python3
"""Writes the bundled synthetic interaction log (data/synthetic_logs.tsv).

The corpus is small and fully deterministic: 500 video/query rows spread over 30 days, with
exposure, click and similarity values chosen so every cleaning rule rejects some rows.
"""
import argparse
import datetime
import random

TOPICS = {
    "nba": ["nba finals", "nba finals game 7", "nba draft", "nba playoffs", "nba highlights"],
    "lakers": ["lakers highlights", "lakers trade", "lakers vs celtics"],
    "cooking": ["cooking pasta", "cooking rice", "cooking steak", "cooking tips"],
    "coffee": ["café latte art", "coffee brewing", "coffee beans"],
    "cats": ["cat videos", "cat food", "cat toys", "cute cats"],
    "dogs": ["dog training", "dog grooming", "dog tricks"],
    "travel": ["travel tips", "travel vlog japan", "travel packing"],
    "phones": ["phone review", "phone camera test", "phone unboxing"],
    "games": ["game walkthrough", "game trailer", "gaming setup"],
    "fitness": ["home workout", "morning yoga", "running shoes"],
}

CAPTIONS = [
    "watch this {a} clip about {q}",
    "best moments: {q} {a}",
    "my take on {q} you will love it",
    "{q} explained in one minute",
    "today we try {q} {a}",
]
ADJ = ["amazing", "quick", "funny", "epic", "easy", "daily"]
OCR = ["{t} now", "top {t}", "{t} part 2", "", "new {t}"]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--output", default="data/synthetic_logs.tsv")
    parser.add_argument("--rows", type=int, default=500)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    start = datetime.datetime(2024, 5, 1, 8, 0, 0)
    topics = sorted(TOPICS)
    rows = []
    for i in range(args.rows):
        topic = rng.choice(topics)
        query = rng.choice(TOPICS[topic])
        caption = rng.choice(CAPTIONS).format(q=query, a=rng.choice(ADJ))
        ocr = rng.choice(OCR).format(t=topic)
        if rng.random() < 0.03:
            caption += " rumor"
        roll = rng.random()
        exposure = rng.randint(1000, 50000) if roll > 0.08 else rng.randint(100, 999)
        clicks = rng.randint(10, max(10, exposure // 20)) if rng.random() > 0.06 else rng.randint(0, 9)
        similarity = round(rng.uniform(0.45, 0.95), 3) if rng.random() > 0.07 else round(rng.uniform(0.1, 0.43), 3)
        when = start + datetime.timedelta(days=rng.randint(0, 29), seconds=rng.randint(0, 86399))
        rows.append((caption, ocr, query, exposure, clicks, similarity, when.strftime("%Y-%m-%dT%H:%M:%S")))

    with open(args.output, "w", encoding="utf-8", newline="\n") as out:
        out.write("caption\tocr_cover\tquery\texposure\tclicks\tsimilarity\ttimestamp\n")
        for row in rows:
            out.write("\t".join(str(v) for v in row) + "\n")


if __name__ == "__main__":
    main()
