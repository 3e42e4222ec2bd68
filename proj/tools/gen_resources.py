#!/usr/bin/env python3
"""Regenerates the shipped registries, mock corpora and mock rulebooks.

Output is deterministic; rerun after editing the tables below.
"""
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "resources"

# name, keyphrase, synonyms, explanation emitted by the mock
MOCK = [
    ("sports", "sports", ["sport"], "sports"),
    ("crime", "crime", ["criminal"], "crime and criminal activity"),
    ("math", "math", ["mathematics"], "mathematics"),
    ("health", "health", ["medical"], "health and medicine"),
    ("water", "water", [], "clean water"),
    ("shelter", "shelter", ["housing"], "shelter and housing"),
    ("physics", "physics", [], "physics"),
    ("business", "business", ["commerce"], "business and commerce"),
    ("technology", "technology", ["tech"], "technology"),
    ("politics", "politics", ["government"], "politics and government"),
]

FILLER = (
    "morning evening people small large city river road window table chair green "
    "quiet loud friend letter market garden bridge train station paper coffee "
    "story little brown yellow autumn winter summer spring walk talk open close "
    "early late bright dark soft warm cold old new young busy slow fast long short "
    "kitchen bread music picture corner street village forest cloud rain snow wind"
).split()

LIVE = [
    ("0-irony", "sarcasm", "contains irony"),
    ("1-objective", "unbiased", "is a more objective description of what happened"),
    ("2-subjective", "subjective", "contains subjective opinion"),
    ("3-god", "religious", "believes in god"),
    ("4-atheism", "atheistic", "is against religion"),
    ("5-evacuate", "evacuation", "involves a need for people to evacuate"),
    ("6-terorrism", "terrorism", "describes a situation that involves terrorism"),
    ("7-crime", "crime", "involves crime"),
    ("8-shelter", "shelter", "describes a situation where people need shelter"),
    ("9-food", "hunger", "is related to food security"),
    ("10-infrastructure", "infrastructure", "is related to infrastructure"),
    ("11-regime change", "regime change", "describes a regime change"),
    ("12-medical", "health", "is related to a medical situation"),
    ("13-water", "water", "involves a situation where people need clean water"),
    ("14-search", "rescue", "involves a search/rescue situation"),
    ("15-utility", "utility", "expresses need for utility, energy or sanitation"),
    ("16-hillary", "Hillary", "is against Hillary"),
    ("17-hillary", "Hillary", "supports hillary"),
    ("18-offensive", "derogatory", "contains offensive content"),
    ("19-offensive", "toxic", "insult women or immigrants"),
    ("20-pro-life", "pro-life", "is pro-life"),
    ("21-pro-choice", "abortion", "supports abortion"),
    ("22-physics", "physics", "is about physics"),
    ("23-computer science", "computers", "is related to computer science"),
    ("24-statistics", "statistics", "is about statistics"),
    ("25-math", "math", "is about math research"),
    ("26-grammar", "ungrammatical", "is ungrammatical"),
    ("27-grammar", "grammatical", "is grammatical"),
    ("28-sexis", "sexist", "is offensive to women"),
    ("29-sexis", "feminism", "supports feminism"),
    ("30-news", "world", "is about world news"),
    ("31-sports", "sports news", "is about sports news"),
    ("32-business", "business", "is related to business"),
    ("33-tech", "technology", "is related to technology"),
    ("34-bad", "negative", "contains a bad movie review"),
    ("35-good", "good", "thinks the movie is good"),
    ("36-quantity", "quantity", "asks for a quantity"),
    ("37-location", "location", "asks about a location"),
    ("38-person", "person", "asks about a person"),
    ("39-entity", "entity", "asks about an entity"),
    ("40-abbrevation", "abbreviation", "asks about an abbreviation"),
    ("41-defin", "definition", "contains a definition"),
    ("42-environment", "environmentalism", "is against environmentalist"),
    ("43-environment", "environmentalism", "is environmentalist"),
    ("44-spam", "spam", "is a spam"),
    ("45-fact", "facts", "asks for factual information"),
    ("46-opinion", "opinion", "asks for an opinion"),
    ("47-math", "science", "is related to math and science"),
    ("48-health", "health", "is related to health"),
    ("49-computer", "computers", "related to computer or internet"),
    ("50-sport", "sports", "is related to sports"),
    ("51-entertainment", "entertainment", "is about entertainment"),
    ("52-family", "relationships", "is about family and relationships"),
    ("53-politic", "politics", "is related to politics or government"),
]

# Hand-picked synonyms for the stemmed-token matcher.
LIVE_SYNONYMS = {
    "sarcasm": ["irony", "sarcastic", "ironic"],
    "unbiased": ["objective", "neutral", "factual"],
    "subjective": ["opinion", "personal"],
    "religious": ["religion", "god", "faith"],
    "atheistic": ["atheism", "atheist"],
    "evacuation": ["evacuate", "flee"],
    "terrorism": ["terrorist", "attack"],
    "crime": ["criminal"],
    "shelter": ["housing", "homeless"],
    "hunger": ["food", "famine"],
    "infrastructure": ["roads", "bridges"],
    "regime change": ["coup", "overthrow", "revolution"],
    "health": ["medical", "medicine", "healthcare"],
    "water": ["drinking"],
    "rescue": ["search"],
    "utility": ["energy", "sanitation", "electricity"],
    "Hillary": ["clinton"],
    "derogatory": ["offensive", "insult"],
    "toxic": ["insult", "hate"],
    "pro-life": ["anti-abortion"],
    "abortion": ["pro-choice"],
    "physics": ["physical"],
    "computers": ["computer", "computing"],
    "statistics": ["statistical"],
    "math": ["mathematics", "mathematical"],
    "ungrammatical": ["grammar", "errors"],
    "grammatical": ["grammar"],
    "sexist": ["sexism", "misogyny"],
    "feminism": ["feminist"],
    "world": ["international", "global"],
    "sports news": ["sport", "athletics"],
    "business": ["commerce", "economy", "finance"],
    "technology": ["tech"],
    "negative": ["bad", "criticism"],
    "good": ["positive", "praise"],
    "quantity": ["number", "amount"],
    "location": ["place", "where"],
    "person": ["people", "who"],
    "entity": ["thing", "object"],
    "abbreviation": ["acronym"],
    "definition": ["define", "meaning"],
    "environmentalism": ["environment", "environmental", "climate"],
    "spam": ["advertisement", "scam"],
    "facts": ["factual", "information"],
    "opinion": ["opinions"],
    "science": ["scientific"],
    "entertainment": ["celebrity", "movies"],
    "relationships": ["family", "relationship"],
    "politics": ["political", "government"],
}


def mock_corpus(index, rng):
    name, key, syns, _ = MOCK[index]
    other = MOCK[(index + 3) % len(MOCK)][1]
    docs = []
    for d in range(10):
        words = [rng.choice(FILLER) for _ in range(12)]
        # Four documents carry the keyphrase (or a synonym) once; one carries
        # a single mention of another module's keyphrase.
        if d in (0, 3, 6, 9):
            vocab = [key] + syns
            words[rng.randrange(1, 11)] = vocab[d % len(vocab)]
        if d == 5:
            words[rng.randrange(1, 11)] = other
        docs.append({"id": f"{name}-{d:02d}", "text": " ".join(words)})
    return docs


def unique_trigrams(docs):
    grams = set()
    for doc in docs:
        w = doc["text"].split()
        grams.update(tuple(w[i:i + 3]) for i in range(len(w) - 2))
    return len(grams)


def main():
    mock_dir = ROOT / "mock"
    (mock_dir / "corpora").mkdir(parents=True, exist_ok=True)
    registry = []
    for i, (name, key, syns, _) in enumerate(MOCK):
        rng = random.Random(1000 + i)
        path = mock_dir / "corpora" / f"{name}.jsonl"
        with path.open("w") as f:
            docs = mock_corpus(i, rng)
            while unique_trigrams(docs) != 100:
                docs = mock_corpus(i, rng)
            for doc in docs:
                f.write(json.dumps(doc) + "\n")
        registry.append({"name": name, "groundtruth_keyphrase": key, "synonyms": syns,
                         "corpus": f"corpora/{name}.jsonl"})
    (mock_dir / "registry10.json").write_text(json.dumps(registry, indent=2) + "\n")

    summaries, gap = {}, {}
    for _, key, syns, expl in MOCK:
        for tok in [key] + syns:
            summaries[tok] = expl
            gap[tok] = ["everyday routines", expl]
    (mock_dir / "rulebook.json").write_text(
        json.dumps({"summaries": summaries, "templates": {}}, indent=2) + "\n")
    (mock_dir / "gap_rulebook.json").write_text(
        json.dumps({"summaries": gap, "templates": {}}, indent=2) + "\n")

    live = []
    for name, key, _ in LIVE:
        live.append({"name": name, "groundtruth_keyphrase": key,
                     "synonyms": LIVE_SYNONYMS.get(key, []),
                     "corpus": f"corpora/{name.replace(' ', '_')}.jsonl"})
    (ROOT / "live").mkdir(parents=True, exist_ok=True)
    (ROOT / "live" / "registry54.json").write_text(json.dumps(live, indent=2) + "\n")


if __name__ == "__main__":
    main()
