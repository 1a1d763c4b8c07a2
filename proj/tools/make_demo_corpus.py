#!/usr/bin/env python3
# Copyright 2026 The depemb Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Deterministic synthetic treebank for demos and tests.

Two topics (farm animals, computing) share one small grammar. Every sentence
is emitted twice, once with Universal relations and once with Stanford
relations, each with a hand-written enhanced DEPS column. Toy word-pair
datasets in the public file layouts are written next to the corpora.

    python3 tools/make_demo_corpus.py [--out data] [--sentences 1000]
"""

import argparse
import json
import os
import random

TOPICS = {
    "animal": {
        "agent": ["dog", "cat", "horse", "cow", "sheep", "rabbit", "fox", "wolf"],
        "thing": ["grass", "hay", "meat", "fish", "bone", "carrot"],
        "adj": ["hungry", "furry", "wild", "lazy"],
        "trans": [("chase", "chased"), ("eat", "ate"), ("bite", "bit"), ("hunt", "hunted")],
        "intrans": [("sleep", "slept"), ("rest", "rested"), ("graze", "grazed")],
        "place": ["barn", "field", "forest", "meadow", "stable"],
        "event": ["storm", "rain", "winter"],
    },
    "tech": {
        "agent": ["engineer", "programmer", "admin", "server", "computer", "laptop",
                  "compiler", "robot"],
        "thing": ["code", "program", "file", "database", "software", "patch"],
        "adj": ["fast", "remote", "digital", "buggy"],
        "trans": [("compile", "compiled"), ("install", "installed"), ("debug", "debugged"),
                  ("update", "updated"), ("deploy", "deployed")],
        "intrans": [("crash", "crashed"), ("reboot", "rebooted"), ("fail", "failed")],
        "place": ["lab", "office", "datacenter", "cloud", "network"],
        "event": ["outage", "upgrade", "bug"],
    },
}
PREPS = ["in", "near", "inside"]


class Sentence:
    def __init__(self):
        self.toks = []
        self.mwt = []  # (first, last, form)

    def add(self, form, lemma, upos, xpos):
        self.toks.append({"form": form, "lemma": lemma, "upos": upos, "xpos": xpos,
                          "ud": None, "sd": None, "ud_deps": None, "sd_deps": None})
        return len(self.toks)

    def rel(self, i, head, ud, sd=None):
        self.toks[i - 1]["ud"] = (head, ud)
        self.toks[i - 1]["sd"] = (head, sd or ud)

    def sd_rel(self, i, head, label):
        self.toks[i - 1]["sd"] = (head, label)

    def deps(self, i, ud=None, sd=None):
        if ud is not None:
            self.toks[i - 1]["ud_deps"] = ud
        if sd is not None:
            self.toks[i - 1]["sd_deps"] = sd

    def np(self, rng, topic, kind, adj_p=0.4):
        det = self.add(rng.choice(["the", "a"]), None, "DET", "DT")
        self.toks[det - 1]["lemma"] = "a" if self.toks[det - 1]["form"] == "a" else "the"
        adj = None
        if rng.random() < adj_p:
            a = rng.choice(TOPICS[topic]["adj"])
            adj = self.add(a, a, "ADJ", "JJ")
        noun = rng.choice(TOPICS[topic][kind])
        n = self.add(noun, noun, "NOUN", "NN")
        self.rel(det, n, "det")
        if adj:
            self.rel(adj, n, "amod")
        return n

    def verb(self, pair, past=True):
        lemma, form = pair
        return self.add(form if past else lemma, lemma, "VERB", "VBD" if past else "VB")

    def punct(self, head, form="."):
        p = self.add(form, form, "PUNCT", "." if form == "." else ",")
        self.rel(p, head, "punct")
        return p

    def lines(self, scheme, sent_id, text_comment=True):
        out = [f"# sent_id = {sent_id}"]
        if text_comment:
            out.append("# text = " + " ".join(t["form"] for t in self.toks))
        key, dkey = ("ud", "ud_deps") if scheme == "ud" else ("sd", "sd_deps")
        mwt = {first: (last, form) for first, last, form in self.mwt}
        for i, t in enumerate(self.toks, 1):
            if i in mwt:
                last, form = mwt[i]
                out.append(f"{i}-{last}\t{form}" + "\t_" * 8)
            head, label = t[key]
            deps = t[dkey] if t[dkey] is not None else [(head, label)]
            deps = sorted(set(deps))
            dcol = "|".join(f"{h}:{l}" for h, l in deps) if deps else "_"
            out.append("\t".join([str(i), t["form"], t["lemma"] or "_", t["upos"], t["xpos"],
                                  "_", str(head), label, dcol, "_"]))
        return out


# --- sentence templates ---------------------------------------------------

def transitive(rng, topic):
    s = Sentence()
    n1 = s.np(rng, topic, "agent")
    v = s.verb(rng.choice(TOPICS[topic]["trans"]))
    n2 = s.np(rng, topic, rng.choice(["thing", "agent"]))
    s.rel(n1, v, "nsubj")
    s.rel(v, 0, "root")
    s.rel(n2, v, "obj", "dobj")
    s.punct(v)
    return s


def prepositional(rng, topic):
    s = Sentence()
    n1 = s.np(rng, topic, "agent")
    v = s.verb(rng.choice(TOPICS[topic]["trans"]))
    n2 = s.np(rng, topic, "thing")
    word = rng.choice(PREPS)
    p = s.add(word, word, "ADP", "IN")
    loc = s.np(rng, topic, "place", adj_p=0.2)
    s.rel(n1, v, "nsubj")
    s.rel(v, 0, "root")
    s.rel(n2, v, "obj", "dobj")
    s.rel(p, loc, "case")
    s.sd_rel(p, v, "prep")
    s.rel(loc, v, "obl")
    s.sd_rel(loc, p, "pobj")
    s.deps(loc, ud=[(v, "obl:" + word)], sd=[(v, "prep_" + word)])
    s.deps(p, sd=[])
    s.punct(v)
    return s


def coordinated_subjects(rng, topic):
    s = Sentence()
    n1 = s.np(rng, topic, "agent", adj_p=0.2)
    cc = s.add("and", "and", "CCONJ", "CC")
    n2 = s.np(rng, topic, "agent", adj_p=0.2)
    v = s.verb(rng.choice(TOPICS[topic]["trans"]))
    n3 = s.np(rng, topic, "thing")
    s.rel(n1, v, "nsubj")
    s.rel(cc, n2, "cc")
    s.sd_rel(cc, n1, "cc")
    s.rel(n2, n1, "conj")
    s.rel(v, 0, "root")
    s.rel(n3, v, "obj", "dobj")
    s.deps(n2, ud=[(n1, "conj:and"), (v, "nsubj")], sd=[(n1, "conj_and"), (v, "nsubj")])
    s.deps(cc, sd=[])
    s.punct(v)
    return s


def control(rng, topic):
    s = Sentence()
    n1 = s.np(rng, topic, "agent")
    want = rng.choice([("want", "wanted"), ("try", "tried"), ("need", "needed")])
    w = s.verb(want)
    to = s.add("to", "to", "PART", "TO")
    v = s.verb(rng.choice(TOPICS[topic]["trans"]), past=False)
    n2 = s.np(rng, topic, "thing")
    s.rel(n1, w, "nsubj")
    s.rel(w, 0, "root")
    s.rel(to, v, "mark", "aux")
    s.rel(v, w, "xcomp")
    s.rel(n2, v, "obj", "dobj")
    s.deps(n1, ud=[(w, "nsubj"), (v, "nsubj:xsubj")], sd=[(w, "nsubj"), (v, "xsubj")])
    s.punct(w)
    return s


def coordinated_verbs(rng, topic):
    s = Sentence()
    n1 = s.np(rng, topic, "agent")
    v1, v2 = rng.sample(TOPICS[topic]["trans"], 2)
    a = s.verb(v1)
    cc = s.add("and", "and", "CCONJ", "CC")
    b = s.verb(v2)
    n2 = s.np(rng, topic, "thing")
    s.rel(n1, a, "nsubj")
    s.rel(a, 0, "root")
    s.rel(cc, b, "cc")
    s.sd_rel(cc, a, "cc")
    s.rel(b, a, "conj")
    s.rel(n2, a, "obj", "dobj")
    s.deps(b, ud=[(a, "conj:and")], sd=[(a, "conj_and")])
    s.deps(n1, ud=[(a, "nsubj"), (b, "nsubj")], sd=[(a, "nsubj"), (b, "nsubj")])
    s.deps(n2, ud=[(a, "obj"), (b, "obj")], sd=[(a, "dobj"), (b, "dobj")])
    s.deps(cc, sd=[])
    s.punct(a)
    return s


def fixed_marker(rng, topic):
    s = Sentence()
    n1 = s.np(rng, topic, "agent")
    v = s.verb(rng.choice(TOPICS[topic]["intrans"]))
    b = s.add("because", "because", "SCONJ", "IN")
    o = s.add("of", "of", "ADP", "IN")
    ev = s.np(rng, topic, "event", adj_p=0.0)
    s.rel(n1, v, "nsubj")
    s.rel(v, 0, "root")
    s.rel(b, ev, "case")
    s.sd_rel(b, v, "prep")
    s.rel(o, b, "fixed", "mwe")
    s.rel(ev, v, "obl")
    s.sd_rel(ev, b, "pobj")
    s.deps(ev, ud=[(v, "obl:because_of")], sd=[(v, "prep_because_of")])
    s.deps(b, sd=[])
    s.deps(o, sd=[])
    s.punct(v)
    return s


def three_way(rng, topic):
    s = Sentence()
    n1 = s.np(rng, topic, "agent", adj_p=0.0)
    comma = s.add(",", ",", "PUNCT", ",")
    n2 = s.np(rng, topic, "agent", adj_p=0.0)
    cc = s.add("and", "and", "CCONJ", "CC")
    n3 = s.np(rng, topic, "agent", adj_p=0.0)
    v = s.verb(rng.choice(TOPICS[topic]["trans"]))
    n4 = s.np(rng, topic, "thing")
    s.rel(n1, v, "nsubj")
    s.rel(comma, n2, "punct")
    s.sd_rel(comma, n1, "punct")
    s.rel(n2, n1, "conj")
    s.rel(cc, n3, "cc")
    s.sd_rel(cc, n1, "cc")
    s.rel(n3, n1, "conj")
    s.rel(v, 0, "root")
    s.rel(n4, v, "obj", "dobj")
    for n in (n2, n3):
        s.deps(n, ud=[(n1, "conj:and"), (v, "nsubj")], sd=[(n1, "conj_and"), (v, "nsubj")])
    s.deps(cc, sd=[])
    s.punct(v)
    return s


def coordinated_places(rng, topic):
    s = Sentence()
    n1 = s.np(rng, topic, "agent")
    v = s.verb(rng.choice(TOPICS[topic]["intrans"]))
    w1, w2 = rng.sample(PREPS, 2)
    p1 = s.add(w1, w1, "ADP", "IN")
    l1 = s.np(rng, topic, "place", adj_p=0.0)
    cc = s.add("and", "and", "CCONJ", "CC")
    p2 = s.add(w2, w2, "ADP", "IN")
    l2 = s.np(rng, topic, "place", adj_p=0.0)
    s.rel(n1, v, "nsubj")
    s.rel(v, 0, "root")
    s.rel(p1, l1, "case")
    s.sd_rel(p1, v, "prep")
    s.rel(l1, v, "obl")
    s.sd_rel(l1, p1, "pobj")
    s.rel(cc, l2, "cc")
    s.sd_rel(cc, p1, "cc")
    s.rel(p2, l2, "case")
    s.sd_rel(p2, p1, "conj")
    s.rel(l2, l1, "conj")
    s.sd_rel(l2, p2, "pobj")
    s.deps(l1, ud=[(v, "obl:" + w1)], sd=[(v, "prep_" + w1)])
    s.deps(l2, ud=[(l1, "conj:and"), (v, "obl:" + w2)], sd=[(v, "prep_" + w2)])
    for t in (p1, p2, cc):
        s.deps(t, sd=[])
    s.punct(v)
    return s


def contraction(rng, topic):
    s = Sentence()
    n1 = s.np(rng, topic, "agent")
    ca = s.add("ca", "can", "AUX", "MD")
    nt = s.add("n't", "not", "PART", "RB")
    s.mwt.append((ca, nt, "can't"))
    v = s.verb(rng.choice(TOPICS[topic]["trans"]), past=False)
    n2 = s.np(rng, topic, "thing")
    s.rel(n1, v, "nsubj")
    s.rel(ca, v, "aux")
    s.rel(nt, v, "advmod", "neg")
    s.rel(v, 0, "root")
    s.rel(n2, v, "obj", "dobj")
    s.punct(v)
    return s


CORPUS_TEMPLATES = [(transitive, 4), (prepositional, 3), (coordinated_subjects, 2),
                    (control, 2), (coordinated_verbs, 2), (fixed_marker, 1)]
FIXTURE_TEMPLATES = [transitive, prepositional, coordinated_subjects, control,
                     coordinated_verbs, fixed_marker, three_way, coordinated_places,
                     contraction]


def build_corpus(n, seed):
    rng = random.Random(seed)
    fns = [f for f, w in CORPUS_TEMPLATES for _ in range(w)]
    return [rng.choice(fns)(rng, rng.choice(sorted(TOPICS))) for _ in range(n)]


def build_fixtures(n, seed):
    rng = random.Random(seed)
    out = []
    for i in range(n):
        fn = FIXTURE_TEMPLATES[i % len(FIXTURE_TEMPLATES)]
        out.append(fn(rng, rng.choice(sorted(TOPICS))))
    return out


def write_conllu(path, sentences, scheme, prefix):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for i, s in enumerate(sentences, 1):
            f.write("\n".join(s.lines(scheme, f"{prefix}-{i:04d}")) + "\n\n")


def write_text(path, sentences):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in sentences:
            f.write(" ".join(t["form"] for t in s.toks) + "\n")


# --- toy evaluation sets ----------------------------------------------------

def toy_datasets(out_dir):
    a, t = TOPICS["animal"], TOPICS["tech"]
    similar = [("dog", "cat"), ("horse", "cow"), ("fox", "wolf"), ("sheep", "rabbit"),
               ("engineer", "programmer"), ("server", "computer"), ("laptop", "computer"),
               ("barn", "stable"), ("field", "meadow"), ("lab", "office"),
               ("code", "software"), ("hay", "grass"), ("file", "database")]
    related = [("dog", "bone"), ("cow", "grass"), ("horse", "stable"), ("fox", "forest"),
               ("sheep", "meadow"), ("programmer", "code"), ("server", "datacenter"),
               ("compiler", "program"), ("admin", "network"), ("robot", "lab"),
               ("rabbit", "carrot"), ("cat", "fish"), ("engineer", "patch")]
    both = [("dog", "wolf"), ("code", "program")]
    with open(os.path.join(out_dir, "toy_ws353_similarity.txt"), "w") as f:
        for i, (x, y) in enumerate(similar):
            f.write(f"{x}\t{y}\t{7.0 + (i % 5) * 0.5:.2f}\n")
        f.write("dog\tlaptop\t1.20\n")  # below threshold, filtered out
    with open(os.path.join(out_dir, "toy_ws353_relatedness.txt"), "w") as f:
        for i, (x, y) in enumerate(related):
            f.write(f"{x}\t{y}\t{6.0 + (i % 4) * 0.75:.2f}\n")
        f.write("hay\tcompiler\t0.50\n")
    with open(os.path.join(out_dir, "toy_chiarello.txt"), "w") as f:
        f.write("word1 word2 class\n")
        for x, y in similar:
            f.write(f"{x} {y} similar\n")
        for x, y in related:
            f.write(f"{x} {y} related\n")
        for x, y in both:
            f.write(f"{x} {y} both\n")
    rows = []
    for x, y in similar[:10]:
        rows.append((x, y, "N", 8.0))
    for x, y in related[:6]:
        rows.append((x, y, "N", 4.0))
    for x, y in [("dog", "server"), ("cat", "laptop"), ("barn", "cloud"), ("hay", "file")]:
        rows.append((x, y, "N", 0.5))
    for x, y, s in [("hungry", "lazy", 5.0), ("wild", "furry", 4.5), ("fast", "remote", 4.0),
                    ("buggy", "digital", 3.5), ("hungry", "digital", 0.3)]:
        rows.append((x, y, "A", s))
    for x, y, s in [("chased", "hunted", 7.5), ("compiled", "deployed", 7.0),
                    ("installed", "updated", 6.5), ("ate", "bit", 5.5),
                    ("chased", "compiled", 0.4), ("ate", "debugged", 0.2)]:
        rows.append((x, y, "V", s))
    with open(os.path.join(out_dir, "toy_simlex.txt"), "w") as f:
        f.write("word1\tword2\tPOS\tSimLex999\tconc(w1)\n")
        for x, y, p, s in rows:
            f.write(f"{x}\t{y}\t{p}\t{s:.2f}\t4.5\n")
    del a, t


def pipeline_config(out_dir):
    # Both schemes at every level, then the three linear baselines.
    variants = []
    for scheme, prefix, corpus in [("stanford", "sd", "corpus.sd.conllu"),
                                   ("universal", "ud", "corpus.ud.conllu")]:
        for level in ["unlabeled", "simplified", "basic", "enhanced", "enhanced++"]:
            variants.append({"name": f"{prefix}-{level}", "model": "deps", "scheme": scheme,
                             "level": level, "corpus": corpus})
    variants += [{"name": "cbow-k2", "model": "cbow", "window": 2},
                 {"name": "cbow-k5", "model": "cbow", "window": 5},
                 {"name": "skipgram-k5", "model": "skipgram", "window": 5}]
    cfg = {
        "corpus": "corpus.ud.conllu",
        "scheme": "universal",
        "level": "basic",
        "enhance_mode": "rules",
        "extraction": {"lowercase": True, "include_punct": False},
        "trainer": {"dimension": 50, "negatives": 5, "subsample": 1e-3, "epochs": 5,
                    "step_size": 0.025, "unigram_power": 0.75, "min_count": 2},
        "datasets": {"ws353_similarity": "toy_ws353_similarity.txt",
                     "ws353_relatedness": "toy_ws353_relatedness.txt",
                     "chiarello": "toy_chiarello.txt",
                     "simlex": "toy_simlex.txt",
                     "strict": False, "oov": "skip"},
        "output_dir": "../../demo-out",
        "seed": 7,
        "workers": 1,
        "variants": variants,
    }
    with open(os.path.join(out_dir, "pipeline.json"), "w") as f:
        json.dump(cfg, f, indent=2)
        f.write("\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--sentences", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20140622)
    args = ap.parse_args()

    demo = os.path.join(args.out, "demo")
    fixtures = os.path.join(args.out, "fixtures")
    os.makedirs(demo, exist_ok=True)
    os.makedirs(fixtures, exist_ok=True)

    corpus = build_corpus(args.sentences, args.seed)
    write_conllu(os.path.join(demo, "corpus.ud.conllu"), corpus, "ud", "demo")
    write_conllu(os.path.join(demo, "corpus.sd.conllu"), corpus, "sd", "demo")
    write_text(os.path.join(demo, "corpus.txt"), corpus)
    toy_datasets(demo)
    pipeline_config(demo)

    fx = build_fixtures(50, args.seed + 1)
    write_conllu(os.path.join(fixtures, "fixtures.ud.conllu"), fx, "ud", "fx")
    write_conllu(os.path.join(fixtures, "fixtures.sd.conllu"), fx, "sd", "fx")


if __name__ == "__main__":
    main()
