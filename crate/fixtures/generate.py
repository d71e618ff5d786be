"""Regenerates the demo fixture: word vectors, parsed corpora, taxonomies.

Each synonym group has one random center; every language adds a small
constant offset and every word a little noise, so same-group words across
languages sit far closer to each other than to any other group.

    python3 generate.py
"""

import numpy as np

DIM = 8
NOISE = 0.05
MIN_GAP = 10 * NOISE
SEED = 20240611

# group -> (UPOS, {lang: three synonyms})
GROUPS = [
    ("NOUN", {"en": ["cat", "kitty", "feline"], "de": ["katze", "kater", "mieze"], "es": ["gato", "minino", "felino"]}),
    ("NOUN", {"en": ["fish", "trout", "salmon"], "de": ["fisch", "forelle", "lachs"], "es": ["pez", "trucha", "salmon"]}),
    ("NOUN", {"en": ["child", "kid", "youngster"], "de": ["kind", "knirps", "bub"], "es": ["nino", "chico", "crio"]}),
    ("VERB", {"en": ["eats", "devours", "consumes"], "de": ["isst", "frisst", "verzehrt"], "es": ["come", "devora", "consume"]}),
    ("VERB", {"en": ["sees", "watches", "observes"], "de": ["sieht", "beobachtet", "betrachtet"], "es": ["ve", "mira", "observa"]}),
    ("VERB", {"en": ["catches", "grabs", "seizes"], "de": ["faengt", "greift", "packt"], "es": ["atrapa", "agarra", "coge"]}),
]
DETERMINER = {"en": "the", "de": "der", "es": "el"}
LANGS = ["en", "de", "es"]
NOUNS = [g for g, (tag, _) in enumerate(GROUPS) if tag == "NOUN"]
VERBS = [g for g, (tag, _) in enumerate(GROUPS) if tag == "VERB"]


def centers(rng):
    while True:
        c = rng.normal(0.0, 1.0, size=(len(GROUPS) + 1, DIM))
        gaps = [np.linalg.norm(c[i] - c[j]) for i in range(len(c)) for j in range(i)]
        if min(gaps) >= MIN_GAP:
            return c


def write_vectors(rng, cen, lang):
    offset = rng.normal(0.0, NOISE, size=DIM)
    rows = []
    for g, (_, words) in enumerate(GROUPS):
        for w in words[lang]:
            rows.append((w, cen[g] + offset + rng.normal(0.0, NOISE, size=DIM)))
    rows.append((DETERMINER[lang], cen[-1] + offset + rng.normal(0.0, NOISE, size=DIM)))
    with open(f"{lang}.vec", "w") as f:
        f.write(f"{len(rows)} {DIM}\n")
        for w, v in rows:
            f.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")


def token(i, form, upos, head, rel):
    return f"{i}\t{form}\t{form}\t{upos}\t_\t_\t{head}\t{rel}\t_\t_"


def svo_sentence(lang, sid, subj, verb, obj):
    det = DETERMINER[lang]
    lines = [
        f"# sent_id = {sid}",
        token(1, det, "DET", 2, "det"),
        token(2, subj, "NOUN", 3, "nsubj"),
        token(3, verb, "VERB", 0, "root"),
        token(4, det, "DET", 5, "det"),
        token(5, obj, "NOUN", 3, "obj"),
        token(6, ".", "PUNCT", 3, "punct"),
    ]
    return "\n".join(lines) + "\n\n"


def write_corpus(lang):
    out = []
    n = 0
    # every noun appears as subject and every verb as predicate
    for i in range(3):
        for k, vg in enumerate(VERBS):
            sg = NOUNS[(i + k) % len(NOUNS)]
            og = NOUNS[(i + k + 1) % len(NOUNS)]
            n += 1
            out.append(svo_sentence(lang, f"{lang}-{n}", GROUPS[sg][1][lang][i], GROUPS[vg][1][lang][i],
                                    GROUPS[og][1][lang][(i + 1) % 3]))
    # noun phrase only: no subject, verb or object
    n += 1
    out.append(
        f"# sent_id = {lang}-{n}\n"
        + token(1, DETERMINER[lang], "DET", 2, "det") + "\n"
        + token(2, GROUPS[NOUNS[0]][1][lang][0], "NOUN", 0, "root") + "\n\n"
    )
    # subject outside the vocabulary
    n += 1
    oov = {"en": "zebra", "de": "zebra", "es": "cebra"}[lang]
    out.append(svo_sentence(lang, f"{lang}-{n}", oov, GROUPS[VERBS[0]][1][lang][0], GROUPS[NOUNS[1]][1][lang][0]))
    with open(f"{lang}.conllu", "w") as f:
        f.write("".join(out))


def main():
    rng = np.random.default_rng(SEED)
    cen = centers(rng)
    for lang in LANGS:
        write_vectors(rng, cen, lang)
        write_corpus(lang)
    with open("taxonomy.txt", "w") as f:
        f.write("# demo taxonomy\nGermanic: en,de\nRomance: es\n")
    with open("taxonomy_en_de.txt", "w") as f:
        f.write("Germanic: en,de\n")


if __name__ == "__main__":
    main()
