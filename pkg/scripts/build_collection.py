#!/usr/bin/env python3
"""Build the annotated document collection and its manifest.

The collection is synthetic but statistically faithful: batch sizes,
per-reviewer label counts, per-topic splits, keyword occurrence patterns
and the two-reviewer agreement table are all pinned by the plan below, so
the published baseline/keyword table cells and the agreement coefficient
are reproduced exactly by construction.  Text is generated from themed
word pools with a per-paragraph "deliberative intensity" that controls
how separable the two classes are for trained classifiers.

Usage: python scripts/build_collection.py [--out data] [--seed 20260810]
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import textwrap
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from foia_review import porter
from foia_review.baselines import KEYWORDS, keyword_predict
from foia_review.features import tokenize

# ---------------------------------------------------------------------------
# Quota plan.  One row per subject file:
#   (file name, topic, paragraphs, D1, T0, keyword hits in D1/D0/T0, documents)
# Batch E5 rows: (file name, topic, paragraphs, keyword hits, documents).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FilePlan:
    name: str
    topic: str
    n: int
    d1: int
    t0: int
    k_d1: int
    k_d0: int
    k_t0: int
    docs: int


PLAN: dict[str, list[FilePlan]] = {
    "K1": [
        FilePlan("Superfund", "Superfund", 19, 11, 3, 5, 5, 1, 3),
        FilePlan("Welfare Budget", "Welfare", 85, 20, 9, 5, 8, 0, 15),
        FilePlan("Welfare-Blair Visit", "Welfare", 75, 18, 8, 5, 9, 1, 14),
        FilePlan("Welfare Waivers", "Welfare", 85, 20, 9, 5, 7, 0, 15),
        FilePlan("Service Summit Policy", "Service", 100, 37, 10, 10, 3, 0, 18),
        FilePlan("Service General", "Service", 98, 36, 10, 10, 4, 0, 18),
        FilePlan("Veterans Affairs/Filipinos", "Health", 21, 7, 2, 3, 5, 0, 4),
        FilePlan("Drugs Coerced Abstinence", "Drugs", 20, 7, 2, 1, 2, 0, 4),
        FilePlan("Drugs Heroin Chic", "Drugs", 20, 7, 3, 1, 1, 1, 4),
    ],
    "K2": [
        FilePlan("Education/TIMSS Meeting", "Education", 35, 9, 7, 0, 1, 0, 7),
        FilePlan("Education/Troops to Teachers", "Education", 33, 9, 7, 0, 2, 0, 7),
        FilePlan("Education/Vouchers", "Education", 35, 9, 7, 1, 3, 0, 7),
        FilePlan("Environment/Climate Change", "Environment", 38, 12, 10, 7, 2, 1, 7),
        FilePlan("Kids Executive Order", "Kids", 92, 65, 18, 26, 0, 1, 18),
        FilePlan("Family Child Care Policy", "Family", 30, 6, 8, 3, 1, 0, 6),
        FilePlan("Social Security/Nazis", "Social Security", 36, 13, 8, 6, 2, 1, 7),
        FilePlan("Social Security/Prisoners", "Social Security", 36, 14, 8, 7, 1, 1, 7),
        FilePlan("Drugs/Drug Testing", "Drugs", 60, 16, 15, 4, 2, 1, 12),
        FilePlan("Drugs/Needle Exchange", "Drugs", 52, 13, 13, 4, 1, 1, 10),
    ],
    "K3": [
        FilePlan("Emails Received", "Miscellaneous Emails", 188, 38, 30, 15, 13, 1, 34),
        FilePlan("Health/Radiation Experiments", "Health", 46, 10, 5, 7, 16, 1, 8),
        FilePlan("Health/Organ Transplants", "Health", 46, 10, 5, 7, 16, 0, 8),
        FilePlan("Health/Nursing Homes", "Health", 46, 10, 5, 7, 16, 0, 8),
        FilePlan("Health/Medicaid Cap", "Health", 46, 11, 5, 7, 16, 0, 8),
        FilePlan("Health/Immunization", "Health", 46, 10, 5, 7, 16, 1, 8),
        FilePlan("Health/Genetic Screening", "Health", 46, 11, 5, 8, 17, 0, 8),
        FilePlan("Drugs/Southwest Border", "Drugs", 86, 35, 8, 5, 3, 0, 15),
        FilePlan("Drugs/Methadone Treatment", "Drugs", 85, 34, 8, 4, 2, 1, 15),
        FilePlan("Environment/Port Dredging", "Environment", 35, 18, 4, 9, 10, 1, 8),
    ],
    "R4": [
        FilePlan("Child Support/Gambling", "Child Support", 110, 19, 15, 9, 6, 1, 18),
        FilePlan("Child Support/License", "Child Support", 106, 18, 14, 9, 5, 0, 17),
        FilePlan("Fathers/Bayh Bill", "Fathers", 45, 7, 6, 1, 7, 0, 8),
        FilePlan("Budget 2001 FY New Ideas", "Budget", 100, 46, 13, 13, 5, 1, 17),
        FilePlan("Disability-Kennedy-Jeffords 1999", "Disability", 105, 23, 14, 10, 6, 1, 17),
    ],
    "K5": [
        FilePlan("Tax Proposals", "Tax Proposals", 253, 95, 26, 45, 8, 2, 31),
        FilePlan("Drugs/Media Campaign", "Drugs", 190, 66, 20, 7, 2, 1, 23),
        FilePlan("Drugs/Meth Report", "Drugs", 188, 66, 20, 7, 1, 0, 23),
    ],
}

E5_PLAN = [
    ("Tax Proposals", "Tax Proposals", 96, 6, 18),
    ("Drugs/Media Campaign", "Drugs", 95, 6, 17),
    ("Drugs/Meth Report", "Drugs", 95, 5, 17),
]

# Two-reviewer structure for batch K2, as (B label, AB label) pools keyed by
# (reviewer A label, keyword-hit flag).  Totals reproduce the agreement table:
# collapsing A's T0 into the zero class gives cells 212 / 69 / 6 / 160.
K2_JOINT_POOLS = {
    ("T0", False): [("D0", "T0")] * 95,
    ("T0", True): [("D0", "T0")] * 6,
    ("D1", True): [("D1", "D1")] * 58,
    ("D1", False): [("D1", "D1")] * 102 + [("D0", "D1")] * 6,
    ("D0", True): [("D1", "D1")] * 10 + [("D0", "D0")] * 5,
    ("D0", False): [("D1", "D1")] * 51 + [("D1", "D0")] * 8 + [("D0", "D0")] * 106,
}

# ---------------------------------------------------------------------------
# Text generation.
# ---------------------------------------------------------------------------

# Difficulty knobs for the trained classifiers (tuned on cross-validation).
# Paragraphs mix two sentence species: deliberative sentences carry the
# signal, factual sentences look like decided zeros.  The irreducible
# errors come from judgment calls: a share of decided zeros read exactly
# like exempt text (capping every model's precision) and a share of
# exempt paragraphs read factual (capping recall).
DECOY_RATE = 0.48              # zeros written in fully deliberative style
CONNECTIVE_RATE = 0.8          # short factual note right after an exempt run
HARD_POS_RATE = 0.07           # exempt paragraphs written in factual style
DELIB_SENT_OPEN = 0.97         # exempt paragraphs open deliberatively
DELIB_SENT_RATE_POS = 0.75     # later-sentence deliberative share in exempt text
DELIB_SENT_RATE_NEG = 0.12     # ... in decided zeros (sentence-level decoys)
DELIB_SENT_RATE_ADJ = 0.15     # ... in zeros adjacent to an exempt run
BRIDGE_RATE = 0.50             # adjacent zeros reduced to a neutral one-liner
DELIB_RATE_IN_SENT = (0.55, 0.85)   # delib-pool token share inside such a sentence
DELIB_RATE_IN_FACT = 0.01
FACT_RATE_IN_SENT = 0.03       # fact-pool share inside a deliberative sentence
FACT_RATE_IN_FACT = (0.20, 0.36)
TOPIC_SLOT_RATE = 0.16
FILLER_SLOT_RATE = 0.14
NUMBER_SLOT_RATE = 0.03

FUNCTION_WORDS = (
    "the of to and in that for on we is be this it with as have will would are at by "
    "from our has if not or their they can should but more about which been also an "
    "was were when what there these those may need how its some one two other over "
    "after before between both because while under through during against"
).split()

DELIB_WORDS: list[tuple[str, int]] = [
    ("options", 6), ("think", 8), ("believe", 5), ("recommend", 5), ("recommends", 2),
    ("recommended", 3), ("recommendations", 2), ("propose", 4), ("proposed", 5),
    ("proposals", 3), ("counter", 3), ("idea", 4), ("ideas", 3), ("approach", 5),
    ("approaches", 2), ("consider", 5), ("considering", 3), ("urge", 2), ("argue", 2),
    ("draft", 4), ("redraft", 1), ("revise", 2), ("language", 4), ("position", 3),
    ("strategy", 4), ("decide", 3), ("decision", 4), ("decisions", 2), ("prefer", 2),
    ("alternatives", 3), ("advise", 2), ("advice", 2), ("suggests", 2), ("suggested", 3),
    ("support", 4), ("oppose", 3), ("opposed", 2), ("program", 5), ("increase", 4),
    ("authority", 3), ("initiatives", 3), ("coordinator", 2), ("targeted", 2),
    ("significant", 3), ("necessary", 4), ("action", 4), ("largest", 2), ("splitting", 1),
    ("accreditation", 1), ("stronger", 2), ("favor", 3), ("push", 2), ("weigh", 1),
    ("doj", 2), ("internally", 1), ("privileged", 1), ("candidly", 1), ("memo", 3),
]

FACT_WORDS: list[tuple[str, int]] = [
    ("today", 6), ("announced", 4), ("committee", 5), ("report", 6), ("reported", 4),
    ("percent", 5), ("data", 4), ("released", 3), ("approved", 3), ("state", 6),
    ("federal", 5), ("agency", 4), ("staff", 4), ("meeting", 5), ("statement", 3),
    ("press", 3), ("information", 4), ("update", 2), ("current", 3), ("final", 3),
    ("summary", 2), ("numbers", 2), ("estimates", 2), ("published", 2), ("issued", 2),
    ("law", 4), ("court", 3), ("police", 3), ("soon", 4), ("let", 5), ("know", 4),
    ("posted", 2), ("week", 4), ("month", 3), ("year", 4), ("office", 4),
    ("director", 3), ("secretary", 3), ("administration", 3), ("clinton", 2),
    ("according", 3), ("officials", 3), ("review", 3), ("schedule", 2), ("hearing", 2),
    ("signed", 2), ("enacted", 2), ("figures", 2), ("totals", 1), ("briefing", 2),
    ("agree", 2), ("defer", 1), ("comfortable", 1),
]

JOURNAL_WORDS: list[tuple[str, int]] = [
    ("article", 4), ("newspaper", 3), ("editor", 2), ("column", 2), ("yesterday", 3),
    ("reporters", 3), ("sources", 3), ("quoted", 3), ("interview", 2), ("page", 2),
    ("story", 3), ("coverage", 2), ("editorial", 2), ("wire", 1), ("byline", 1),
    ("spokesman", 3), ("publicly", 2), ("readers", 1),
]

TOPIC_WORDS: dict[str, list[str]] = {
    "Drugs": ("drug drugs heroin methadone treatment abstinence testing border "
              "traffickers enforcement campaign media meth addiction prevention users "
              "trafficking cocaine interdiction youth abuse").split(),
    "Health": ("health radiation experiments organ transplants nursing homes medicaid "
               "cap immunization genetic screening patients medical hospitals coverage "
               "veterans benefits filipino human subjects").split(),
    "Tax Proposals": ("tax taxes credit credits rate rates revenue deduction deductions "
                      "income taxpayers brackets exemption irs fiscal relief refund "
                      "filers estate capital").split(),
    "Welfare": ("welfare recipients benefits reform work requirements caseload "
                "assistance waivers block grants poverty tanf blair visit mothers "
                "employment eligibility food stamps").split(),
    "Child Support": ("child support enforcement custodial parents gambling license "
                      "licenses arrears collections paternity orders payments "
                      "delinquent obligations garnishment").split(),
    "Service": ("service national americorps volunteers summit corps community "
                "tutoring mentoring literacy reading grants scholars citizen "
                "participation").split(),
    "Miscellaneous Emails": ("needle exchange aids hhs confirmation groups forward "
                             "timing issue component compromise agree exchange "
                             "community law general").split(),
    "Disability": ("disability disabled kennedy jeffords workers insurance ssi ssdi "
                   "return employment beneficiaries incentives vocational "
                   "rehabilitation eligibility").split(),
    "Education": ("education schools teachers students vouchers testing timss "
                  "standards troops classrooms curriculum scores math reading "
                  "achievement districts").split(),
    "Budget": ("budget appropriations spending surplus fiscal outlays discretionary "
               "caps omb billion million allocations offsets baseline requests").split(),
    "Kids": ("kids children executive order childhood care safety programs youth "
             "families afterschool nutrition").split(),
    "Environment": ("environment climate change emissions kyoto dredging port epa "
                    "cleanup wetlands warming harbor sediment permits").split(),
    "Social Security": ("social security nazis prisoners prisoner payments "
                        "beneficiaries trust fund benefits solvency retirees "
                        "earnings records").split(),
    "Fathers": ("fathers fatherhood bayh bill responsibility parenting dads paternal "
                "involvement households").split(),
    "Family": ("family child care policy leave parental households providers "
               "affordability subsidies").split(),
    "Superfund": ("superfund cleanup sites epa liability brownfields contamination "
                  "polluters remediation").split(),
}

FILLER_BASE = (
    "process question questions point points matter issue issues note notes value "
    "case cases level levels group rule rules step steps change form result results "
    "part parts work area areas list item items section sections detail details "
    "term terms line lines plan plans goal goals view views role roles time times "
    "way ways member members effort efforts record records event events reason "
    "reasons start end half full short long early late likely unlikely broad narrow "
    "clear unclear useful open closed key minor major first second third next last "
    "new old good better best high low higher lower large small wide added moved "
    "kept held given taken found made sent read written called asked told met set "
    "put run built left paid heard seen done gone come spoke brought"
).split()


def _tail_vocabulary(n_words: int) -> list[str]:
    """Deterministic heavy-tailed pseudo-vocabulary.

    Real records are Zipf-distributed: most types are rare, so many test
    tokens are out of vocabulary and word-level evidence is sparse.  The
    syllables end in consonants to keep the forms stable under stemming.
    """
    onsets = ("b br c cl cr d dr f fl g gl gr h j k l m n p pl pr qu r s sc "
              "sk sl sm sp st t tr v w z").split()
    nuclei = "a e i o u ai ea oa ou".split()
    codas = "b ck d g k l m n nd nt p r rd rk rn rt t x".split()
    words = []
    i = 0
    while len(words) < n_words:
        o = onsets[i % len(onsets)]
        v = nuclei[(i // len(onsets)) % len(nuclei)]
        c = codas[(i // (len(onsets) * len(nuclei))) % len(codas)]
        tail = i // (len(onsets) * len(nuclei) * len(codas))
        o2 = onsets[(i * 7 + 3) % len(onsets)]
        v2 = nuclei[(i * 5 + 1) % len(nuclei)]
        word = o + v + o2 + v2 + c if tail or (i % 3) else o + v + c
        if word not in KEYWORDS:
            words.append(word)
        i += 1
    return words


TAIL_VOCAB = _tail_vocabulary(15000)
TAIL_EXPONENT = 1.0
TAIL_SLOT_RATE = 0.26

NUMBERS = "30 10 15 20 25 50 100 40 18 12 5 3 2000 1998 1999 75 60".split()

FIRST_NAMES = ("Sandra Richard Maria Bruce Elena Cynthia Jose Gene Chris Kevin Diana "
               "Paul Andrea Tanya Laura Jennifer Nicole Thomas Sylvia Ann Jonathan "
               "Peter Sally Carol Michael Karen Robert Susan Daniel Emily").split()
LAST_NAMES = ("Thurman Socarides Echaveste Reed Kagan Rice Cerda Sperling Jennings "
              "Thurm Fortuna Weinstein Kane Martin Emmett Klein Rabner Freedman "
              "Mathews Lewis Orszag Jacoby Katzen Rasco Curry Tramontano Higgins "
              "Waldman Baer Blank").split()
OFFICES = "WHO OPD OMB OSTP OVP DPC".split()
MINUTES = "00 15 18 30 44 45 52 05".split()
SECONDS = "00 12 18 30 44 55".split()
MONTH_NAMES = ("January February March April May June July August September October "
               "November December").split()

# Multi-word patterns made of individually bland words: invisible to a
# unigram bag, visible to the tagger's word-context features.  The same
# vocabulary recombines in non-deliberative word order in zero text.
PHRASES_POS = [
    "we might want to",
    "my own sense is",
    "i would lean toward",
    "worth a closer look",
    "are you comfortable with",
    "we could go either way",
    "on balance i would go",
    "happy to defer on",
    "do you agree that",
    "your call on this",
]
# Zero text reuses the same phrase words in scrambled order, so the
# patterns are invisible to a unigram bag but visible to context features.
PHRASE_RATE_POS = 0.55         # share of deliberative sentences carrying a pattern
PHRASE_RATE_NEG = 0.50         # share of factual sentences carrying a scramble

# Exempt paragraphs habitually open with a deliberative lead word, the way
# option papers start sections; decoy sentences imitate the habit.
OPENERS = ["options", "recommendations", "proposals", "thoughts", "draft", "strategy"]
OPENER_RATE_POS = 0.95
OPENER_RATE_DECOY = 0.95

_POS_BIGRAMS = set()
for _p in PHRASES_POS:
    _w = _p.split()
    _POS_BIGRAMS.update(zip(_w, _w[1:]))


def scramble_phrase(rng: random.Random, phrase: str) -> list[str]:
    words = phrase.split()
    for _ in range(20):
        shuffled = words[:]
        rng.shuffle(shuffled)
        if not set(zip(shuffled, shuffled[1:])) & _POS_BIGRAMS:
            return shuffled
    return words[::-1]

KEYWORDS_STRONG = ["option", "recommendation", "proposal", "suggest", "suggestion"]
KEYWORDS_WEAK = ["discuss", "discussion", "ongoing", "upcoming", "alternative",
                 "frank", "candid"]

_DELIB_POOL = [w for w, c in DELIB_WORDS for _ in range(c)]
_FACT_POOL = [w for w, c in FACT_WORDS for _ in range(c)]
_JOURNAL_POOL = [w for w, c in JOURNAL_WORDS for _ in range(c)]

_SUFFIXED = []
for _w in FILLER_BASE:
    _SUFFIXED.append(_w)
_FILLER_POOL = _SUFFIXED


def _assert_safe_pools() -> None:
    banned = set(KEYWORDS)
    for name, pool in [
        ("function", FUNCTION_WORDS),
        ("delib", [w for w, _ in DELIB_WORDS]),
        ("fact", [w for w, _ in FACT_WORDS]),
        ("journal", [w for w, _ in JOURNAL_WORDS]),
        ("filler", _FILLER_POOL),
        ("numbers", NUMBERS),
    ]:
        hit = banned & set(pool)
        assert not hit, f"{name} pool contains keyword tokens: {hit}"
    for topic, pool in TOPIC_WORDS.items():
        hit = banned & set(pool)
        assert not hit, f"topic {topic} pool contains keyword tokens: {hit}"
    for name in FIRST_NAMES + LAST_NAMES:
        assert name.lower() not in banned, f"name {name} is a keyword"


class TextGenerator:
    def __init__(self, rng: random.Random):
        self.rng = rng
        weights = [1.0 / (r + 1) ** TAIL_EXPONENT for r in range(len(TAIL_VOCAB))]
        total = sum(weights)
        acc = 0.0
        self._tail_cum = []
        for w in weights:
            acc += w / total
            self._tail_cum.append(acc)

    def _tail_word(self) -> str:
        import bisect

        return TAIL_VOCAB[bisect.bisect_left(self._tail_cum, self.rng.random())]

    def _sentence(self, topic: str, delib_rate: float, fact_rate: float,
                  journal: bool, phrase_mode: str | None = None,
                  phrase_rate: float = 0.0,
                  length_range: tuple[int, int] = (7, 14)) -> str:
        rng = self.rng
        length = rng.randint(*length_range)
        # Class-bearing pools contribute an exact share of the sentence;
        # the remainder is the common backdrop.
        n_delib = int(round(length * delib_rate))
        n_fact = int(round(length * fact_rate))
        words = [rng.choice(_DELIB_POOL) for _ in range(n_delib)]
        for _ in range(n_fact):
            pool = _JOURNAL_POOL if journal and rng.random() < 0.4 else _FACT_POOL
            words.append(rng.choice(pool))
        backdrop = NUMBER_SLOT_RATE + TOPIC_SLOT_RATE + FILLER_SLOT_RATE + TAIL_SLOT_RATE
        c_num = NUMBER_SLOT_RATE / backdrop
        c_topic = c_num + TOPIC_SLOT_RATE / backdrop
        c_filler = c_topic + FILLER_SLOT_RATE / backdrop
        c_tail = c_filler + TAIL_SLOT_RATE / backdrop
        for _ in range(length - len(words)):
            roll = rng.random() * (backdrop + 0.42)
            if roll < c_num * backdrop:
                words.append(rng.choice(NUMBERS))
            elif roll < c_topic * backdrop:
                words.append(rng.choice(TOPIC_WORDS[topic]))
            elif roll < c_filler * backdrop:
                words.append(rng.choice(_FILLER_POOL))
            elif roll < c_tail * backdrop:
                words.append(self._tail_word())
            else:
                words.append(rng.choice(FUNCTION_WORDS))
        rng.shuffle(words)
        if phrase_mode is not None and rng.random() < phrase_rate:
            phrase = rng.choice(PHRASES_POS)
            tokens = phrase.split() if phrase_mode == "intact" \
                else scramble_phrase(rng, phrase)
            at = rng.randrange(len(words) + 1)
            words[at:at] = tokens
        sentence = " ".join(words)
        sentence = sentence[0].upper() + sentence[1:] + "."
        return sentence

    def body_paragraph(self, topic: str, kind: str, adjacent: bool = False) -> str:
        """kind: d1, d0 or e0."""
        rng = self.rng
        if kind in ("d1", "decoy"):
            k = rng.randint(3, 4)
            n_delib = k
        elif kind == "connective":
            return textwrap.fill(
                self._sentence(topic, 0.0, rng.uniform(0.25, 0.4), journal=False,
                               phrase_mode="scrambled", phrase_rate=0.25,
                               length_range=(6, 10)),
                width=72,
            )
        elif kind == "d0":
            k = rng.randint(1, 3)
            decoy_sentence = rng.random() < (DELIB_SENT_RATE_ADJ if adjacent
                                             else DELIB_SENT_RATE_NEG)
            n_delib = 1 if decoy_sentence else 0
        else:
            k = rng.randint(2, 3)
            n_delib = 1 if rng.random() < 0.06 else 0
        types = ["delib"] * n_delib + ["fact"] * (k - n_delib)
        rng.shuffle(types)
        if kind == "d1" and n_delib and types[0] != "delib":
            types.remove("delib")
            types.insert(0, "delib")
        sentences = []
        for sent_no, sent_type in enumerate(types):
            if sent_type == "delib":
                lo, hi = DELIB_RATE_IN_SENT
                sentences.append(
                    self._sentence(topic, rng.uniform(lo, hi), FACT_RATE_IN_SENT,
                                   journal=False, phrase_mode="intact",
                                   phrase_rate=PHRASE_RATE_POS,
                                   length_range=(9, 16))
                )
            else:
                if kind == "d1":
                    # context sentences inside exempt text stay neutral
                    fact_rate = 0.05
                else:
                    lo, hi = FACT_RATE_IN_FACT
                    fact_rate = rng.uniform(lo, hi)
                sentences.append(
                    self._sentence(topic, DELIB_RATE_IN_FACT, fact_rate,
                                   journal=(kind == "e0"), phrase_mode="scrambled",
                                   phrase_rate=PHRASE_RATE_NEG,
                                   length_range=(6, 12))
                )
        if types and types[0] == "delib":
            opener_rate = OPENER_RATE_POS if kind == "d1" else OPENER_RATE_DECOY
            # judgment-call zeros read deliberative but rarely carry the
            # section-lead habit
            if rng.random() < opener_rate:
                lead = rng.choice(OPENERS).capitalize()
                sentences[0] = f"{lead}. {sentences[0]}"
        return textwrap.fill(" ".join(sentences), width=72)

    def _name(self) -> str:
        return f"{self.rng.choice(FIRST_NAMES)} {self.rng.choice(LAST_NAMES)}"

    def _subject(self, topic: str, keyword: str | None) -> str:
        words = [self.rng.choice(TOPIC_WORDS[topic]).capitalize() for _ in range(2)]
        if keyword:
            words = [keyword.capitalize()] + words
        return " ".join(dict.fromkeys(words))

    def header_paragraph(self, topic: str, email_style: bool, keyword: str | None) -> str:
        rng = self.rng
        if email_style:
            stamp = (f"{rng.randint(1, 12):02d}/{rng.choice([2, 9, 12, 18, 21, 26]):02d}/"
                     f"9{rng.choice([7, 8, 9])} {rng.randint(8, 12):02d}:"
                     f"{rng.choice(MINUTES)}:{rng.choice(SECONDS)} "
                     f"{rng.choice(['AM', 'PM'])}")
            to = f"{self._name()}/{rng.choice(OFFICES)}/EOP"
            cc = f"{self._name()}/{rng.choice(OFFICES)}/EOP"
            return (f"{self._name()}\t{stamp} Record Type: Record\n"
                    f"To: {to} cc: {cc}\n"
                    f"Subject: {self._subject(topic, keyword)}")
        date = f"{rng.choice(MONTH_NAMES)} {rng.choice([2, 9, 12, 18, 21, 26])}, 199{rng.choice([7, 8, 9])}"
        return (f"MEMORANDUM FOR THE {rng.choice(['PRESIDENT', 'CHIEF OF STAFF', 'DPC STAFF'])}\n"
                f"FROM: {self._name()}\n"
                f"DATE: {date}\n"
                f"SUBJECT: {self._subject(topic, keyword)}")

    def signature_paragraph(self) -> str:
        rng = self.rng
        name = self._name()
        if rng.random() < 0.5:
            return name.split()[0]
        title = rng.choice(["Domestic Policy Council", "Office of the Deputy Director",
                            "Special Assistant", "Policy Planning"])
        return f"{name}\n{title}"

    def insert_keyword(self, text: str, keyword: str) -> str:
        lines = text.split("\n")
        pick = self.rng.randrange(len(lines))
        words = lines[pick].split(" ")
        pos = self.rng.randrange(len(words) + 1)
        words.insert(pos, keyword)
        lines[pick] = " ".join(words)
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Document assembly.
# ---------------------------------------------------------------------------

@dataclass
class Para:
    a_label: str            # label under reviewer A (or E0 in batch E5)
    khit: bool
    keyword: str | None
    kind: str               # d1 / d0 / t0 / e0
    adjacent: bool = False  # zero bordering an exempt run
    text: str = ""


@dataclass
class Doc:
    paragraphs: list[Para]


def _partition(rng: random.Random, total: int, parts: int, minimum: int) -> list[int]:
    assert total >= parts * minimum, (total, parts, minimum)
    sizes = [minimum] * parts
    for _ in range(total - parts * minimum):
        sizes[rng.randrange(parts)] += 1
    return sizes


def _spread(rng: random.Random, total: int, parts: int, caps: list[int]) -> list[int]:
    """Distribute `total` over `parts` slots without exceeding per-slot caps."""
    counts = [0] * parts
    order = list(range(parts))
    placed = 0
    while placed < total:
        rng.shuffle(order)
        progressed = False
        for slot in order:
            if placed >= total:
                break
            if counts[slot] < caps[slot]:
                counts[slot] += 1
                placed += 1
                progressed = True
        assert progressed, "caps too tight"
    return counts


def build_file_docs(rng: random.Random, plan: FilePlan, email_style_bias: float) -> list[Doc]:
    body_total = plan.n - plan.t0
    body_sizes = _partition(rng, body_total, plan.docs, 2)
    headers = min(plan.docs, plan.t0)
    sigs = plan.t0 - headers
    has_header = [i < headers for i in range(plan.docs)]
    rng.shuffle(has_header)
    sig_flags = [i < sigs for i in range(plan.docs)]
    rng.shuffle(sig_flags)

    # Exempt material clusters: a document's exempt paragraphs form one
    # contiguous run (option papers, draft sections), filling much of the
    # document before spilling into the next.
    d1_counts = [0] * plan.docs
    remaining = plan.d1
    order = list(range(plan.docs))
    rng.shuffle(order)
    for i in order:
        if remaining <= 0:
            break
        want = max(1, int(body_sizes[i] * rng.uniform(0.6, 1.0)))
        take = min(remaining, body_sizes[i], want)
        d1_counts[i] = take
        remaining -= take
    for i in order:
        if remaining <= 0:
            break
        extra = min(remaining, body_sizes[i] - d1_counts[i])
        d1_counts[i] += extra
        remaining -= extra
    assert remaining == 0

    docs: list[Doc] = []
    for i in range(plan.docs):
        body = body_sizes[i]
        d1_here = d1_counts[i]
        flags = [False] * body
        if d1_here:
            offset = rng.randint(0, body - d1_here)
            for j in range(d1_here):
                flags[offset + j] = True
        paras = [Para("D1" if f else "D0", False, None, "d1" if f else "d0")
                 for f in flags]
        for pos, p in enumerate(paras):
            if p.a_label == "D0":
                p.adjacent = (pos > 0 and paras[pos - 1].a_label == "D1") or (
                    pos + 1 < len(paras) and paras[pos + 1].a_label == "D1"
                )
        # The zero right after an exempt run is usually a terse factual
        # note (sign-offs, scheduling), not a full factual passage.
        for pos, p in enumerate(paras):
            if (p.a_label == "D0" and pos > 0 and paras[pos - 1].a_label == "D1"
                    and rng.random() < CONNECTIVE_RATE):
                p.kind = "connective"
        for p in paras:
            if p.a_label == "D1" and rng.random() < HARD_POS_RATE:
                p.kind = "hard"
        if has_header[i]:
            paras.insert(0, Para("T0", False, None, "t0"))
        if sig_flags[i]:
            paras.append(Para("T0", False, None, "t0_sig"))
        docs.append(Doc(paras))
    return docs


def assign_decoy_docs(rng: random.Random, docs: list[Doc], plan: FilePlan) -> None:
    """Mark whole zero documents as judgment-call decoys.

    Decoy documents read exactly like exempt material (final versions,
    adopted proposals) but carry zero annotations throughout, so they are
    indistinguishable by text, length or position.
    """
    zero_total = sum(1 for d in docs for p in d.paragraphs if p.a_label == "D0")
    budget = int(round(DECOY_RATE * zero_total))
    candidates = [d for d in docs
                  if not any(p.a_label == "D1" for p in d.paragraphs)]
    rng.shuffle(candidates)
    for doc in candidates:
        if budget <= 0:
            break
        body = [p for p in doc.paragraphs if p.a_label == "D0"]
        for p in body:
            p.kind = "decoy"
        budget -= len(body)
    if budget > 0:
        # spill into the zero tails of annotated documents
        others = [d for d in docs if d not in candidates]
        rng.shuffle(others)
        for doc in others:
            if budget <= 0:
                break
            tail = []
            for p in reversed(doc.paragraphs):
                if p.a_label == "D0" and p.kind in ("d0", "connective"):
                    tail.append(p)
                elif p.a_label == "D1":
                    break
            for p in tail:
                p.kind = "decoy"
                budget -= 1


def assign_keywords(rng: random.Random, docs: list[Doc], plan: FilePlan) -> None:
    d1_paras = [p for d in docs for p in d.paragraphs if p.a_label == "D1"]
    d0_paras = [p for d in docs for p in d.paragraphs if p.a_label == "D0"]
    t0_paras = [p for d in docs for p in d.paragraphs if p.a_label == "T0"]
    for paras, count, strong_rate in [
        (d1_paras, plan.k_d1, 0.72),
        (d0_paras, plan.k_d0, 0.12),
        (t0_paras, plan.k_t0, 0.0),
    ]:
        for p in rng.sample(paras, count):
            p.khit = True
            pool = KEYWORDS_STRONG if rng.random() < strong_rate else KEYWORDS_WEAK
            p.keyword = rng.choice(pool)


def realize_text(rng: random.Random, gen: TextGenerator, docs: list[Doc],
                 plan: FilePlan, email_style_bias: float, e5: bool = False) -> None:
    for doc in docs:
        email_style = rng.random() < email_style_bias
        for p in doc.paragraphs:
            if p.kind == "t0":
                p.text = gen.header_paragraph(plan.topic, email_style, p.keyword)
                continue
            if p.kind == "t0_sig":
                p.text = gen.signature_paragraph()
                if p.keyword:
                    p.text = gen.insert_keyword(p.text, p.keyword)
                continue
            kind = "e0" if e5 else p.kind
            if kind == "hard":
                kind = "d0"
            p.text = gen.body_paragraph(plan.topic, kind, p.adjacent)
            assert tokenize(p.text), "paragraph with no tokens"
            if p.keyword:
                p.text = gen.insert_keyword(p.text, p.keyword)
                if rng.random() < 0.2:
                    p.text = gen.insert_keyword(p.text, p.keyword)
        for p in doc.paragraphs:
            assert keyword_predict(p.text) == int(p.khit), (plan.name, p.text)
            assert tokenize(p.text), "paragraph with no tokens"


def build_e5_docs(rng: random.Random, gen: TextGenerator, name: str, topic: str,
                  n: int, khits: int, n_docs: int) -> list[Doc]:
    sizes = _partition(rng, n, n_docs, 3)
    docs = [Doc([Para("E0", False, None, "e0") for _ in range(s)]) for s in sizes]
    paras = [p for d in docs for p in d.paragraphs]
    for p in rng.sample(paras, khits):
        p.khit = True
        p.keyword = rng.choice(KEYWORDS_WEAK)
    plan = FilePlan(name, topic, n, 0, 0, 0, 0, 0, n_docs)
    realize_text(rng, gen, docs, plan, email_style_bias=0.0, e5=True)
    return docs


def slugify(name: str) -> str:
    out = []
    for ch in name.lower():
        if ch.isalnum():
            out.append(ch)
        elif out and out[-1] != "_":
            out.append("_")
    return "".join(out).strip("_")


def marker_file(paragraphs: list[tuple[str, str]]) -> str:
    """Render (label, text) pairs in the marker grammar."""
    chunks = []
    for label, text in paragraphs:
        marker = "0//" if label == "D0" else f"{label}//"
        chunks.append(f"  {marker}\n{text}")
    return "\n".join(chunks) + "\n"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    parser.add_argument("--seed", type=int, default=20260810)
    args = parser.parse_args()

    _assert_safe_pools()
    rng = random.Random(args.seed)
    gen = TextGenerator(rng)
    out_dir = Path(args.out)
    coll_dir = out_dir / "collection"
    coll_dir.mkdir(parents=True, exist_ok=True)

    manifest_rows: list[dict] = []
    batch_counts: dict[str, int] = {}

    k2_pools = {key: list(pool) for key, pool in K2_JOINT_POOLS.items()}
    for pool in k2_pools.values():
        rng.shuffle(pool)

    for batch, files in PLAN.items():
        email_bias = {"K1": 0.35, "K2": 0.45, "K3": 0.5, "R4": 0.35, "K5": 0.2}[batch]
        for plan in files:
            is_emails = plan.name == "Emails Received"
            docs = build_file_docs(rng, plan, email_bias)
            assign_decoy_docs(rng, docs, plan)
            assign_keywords(rng, docs, plan)
            realize_text(rng, gen, docs, plan, 1.0 if is_emails else email_bias)
            slug = slugify(plan.name)
            file_dir = coll_dir / batch / slug
            file_dir.mkdir(parents=True, exist_ok=True)
            for i, doc in enumerate(docs):
                doc_id = f"{batch}/{slug}/{i:03d}"
                batch_counts[batch] = batch_counts.get(batch, 0) + len(doc.paragraphs)
                reviewers = {"A": [(p.a_label, p.text) for p in doc.paragraphs]}
                if batch == "K2":
                    b_labels, ab_labels = [], []
                    for p in doc.paragraphs:
                        b, ab = k2_pools[(p.a_label, p.khit)].pop()
                        b_labels.append((b, p.text))
                        ab_labels.append((ab, p.text))
                    reviewers["B"] = b_labels
                    reviewers["AB"] = ab_labels
                for reviewer, labeled in reviewers.items():
                    path = file_dir / f"doc_{i:03d}.{reviewer}.txt"
                    path.write_text(marker_file(labeled), encoding="utf-8")
                    manifest_rows.append({
                        "doc_id": doc_id,
                        "path": str(path.relative_to(out_dir)),
                        "batch": batch,
                        "custodian": "Rice" if batch == "R4" else "Kagan",
                        "file_name": plan.name,
                        "topic": plan.topic,
                        "reviewer": reviewer,
                    })

    for name, topic, n, khits, n_docs in E5_PLAN:
        docs = build_e5_docs(rng, gen, name, topic, n, khits, n_docs)
        slug = slugify(name)
        file_dir = coll_dir / "E5" / slug
        file_dir.mkdir(parents=True, exist_ok=True)
        for i, doc in enumerate(docs):
            doc_id = f"E5/{slug}/{i:03d}"
            batch_counts["E5"] = batch_counts.get("E5", 0) + len(doc.paragraphs)
            path = file_dir / f"doc_{i:03d}.A.txt"
            path.write_text(
                marker_file([(p.a_label, p.text) for p in doc.paragraphs]),
                encoding="utf-8",
            )
            manifest_rows.append({
                "doc_id": doc_id,
                "path": str(path.relative_to(out_dir)),
                "batch": "E5",
                "custodian": "Kagan",
                "file_name": name,
                "topic": topic,
                "reviewer": "A",
            })

    for pool in k2_pools.values():
        assert not pool, "K2 reviewer pools not exhausted"

    with open(out_dir / "manifest.jsonl", "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"batch_counts": batch_counts}) + "\n")
        for row in manifest_rows:
            fh.write(json.dumps(row) + "\n")

    print(f"wrote {sum(batch_counts.values())} paragraphs across "
          f"{len(set(r['doc_id'] for r in manifest_rows))} documents to {out_dir}")
    print(f"batch counts: {batch_counts}")

    check(out_dir)
    return 0


def check(out_dir: Path) -> None:
    """Validate the written collection against the plan's invariants."""
    from foia_review import corpus as corpus_mod
    from foia_review.baselines import keyword_predict_many
    from foia_review.evaluation import cohens_kappa, confusion, prf, round1

    corpus = corpus_mod.load_collection(out_dir / "manifest.jsonl")
    expected = {"K1": 523, "K2": 447, "K3": 670, "R4": 466, "K5": 631, "E5": 286}
    assert corpus.paragraph_counts == expected, corpus.paragraph_counts

    def kw_stats(batches, reviewer, scope):
        data = corpus_mod.select(corpus, batches, reviewer, scope)
        preds = keyword_predict_many(data.texts)
        cm = confusion(preds, data.labels)
        return data, cm

    d0t0 = corpus_mod.SCOPE_D0_T0
    ks = {"K1", "K2", "K3", "K5"}
    data, cm = kw_stats(ks, "A", d0t0)
    assert (len(data), data.positives) == (2271, 743), (len(data), data.positives)
    assert (cm.tp, cm.tp + cm.fp) == (238, 450), cm
    data, cm = kw_stats({"R4"}, "A", d0t0)
    assert (len(data), data.positives) == (466, 113)
    assert (cm.tp, cm.tp + cm.fp) == (42, 74), cm
    data, cm = kw_stats({"K2"}, "B", d0t0)
    assert (len(data), data.positives) == (447, 229)
    assert (cm.tp, cm.tp + cm.fp) == (68, 79), cm
    data, cm = kw_stats({"K2"}, "AB", d0t0)
    assert (len(data), data.positives) == (447, 227)
    assert (cm.tp, cm.tp + cm.fp) == (68, 79), cm
    data, cm = kw_stats({"K1", "K3", "K5"}, "A", d0t0)
    assert (len(data), data.positives) == (1824, 577)
    assert (cm.tp, cm.tp + cm.fp) == (180, 371), cm

    d0 = corpus_mod.SCOPE_D0
    data = corpus_mod.select(corpus, ks, "A", d0)
    assert (len(data), data.positives) == (1968, 743), (len(data), data.positives)
    data = corpus_mod.select(corpus, {"K2"}, "AB", d0)
    assert (len(data), data.positives) == (346, 227), (len(data), data.positives)

    e5 = corpus_mod.select(corpus, {"E5"}, "A", corpus_mod.SCOPE_D0_T0_E0)
    assert (len(e5), e5.positives) == (286, 0)
    assert int(keyword_predict_many(e5.texts).sum()) == 17

    # Agreement table for the doubly-annotated batch.
    a_bin, b_bin = [], []
    for doc, p in corpus.iter_paragraphs({"K2"}):
        a_bin.append(1 if p.labels["A"] == "D1" else 0)
        b_bin.append(1 if p.labels["B"] == "D1" else 0)
    cells = {
        (0, 0): sum(1 for a, b in zip(a_bin, b_bin) if (a, b) == (0, 0)),
        (0, 1): sum(1 for a, b in zip(a_bin, b_bin) if (a, b) == (0, 1)),
        (1, 0): sum(1 for a, b in zip(a_bin, b_bin) if (a, b) == (1, 0)),
        (1, 1): sum(1 for a, b in zip(a_bin, b_bin) if (a, b) == (1, 1)),
    }
    assert cells == {(0, 0): 212, (0, 1): 69, (1, 0): 6, (1, 1): 160}, cells
    kappa = cohens_kappa(a_bin, b_bin)
    assert abs(kappa - 0.6665) < 1e-3, kappa

    topic_counts: dict[str, int] = {}
    topic_pos: dict[str, int] = {}
    for t in corpus_mod.TOPICS:
        tdata = corpus_mod.select_topic(corpus, t, "A", d0t0)
        topic_counts[t] = len(tdata)
        topic_pos[t] = tdata.positives
    expected_topics = {
        "Drugs": (701, 244), "Health": (297, 69), "Tax Proposals": (253, 95),
        "Welfare": (245, 58), "Child Support": (216, 37), "Service": (198, 73),
        "Miscellaneous Emails": (188, 38), "Disability": (105, 23),
        "Education": (103, 27), "Budget": (100, 46), "Kids": (92, 65),
        "Environment": (73, 30), "Social Security": (72, 27), "Fathers": (45, 7),
        "Family": (30, 6), "Superfund": (19, 11),
    }
    for t, (n, pos) in expected_topics.items():
        assert (topic_counts[t], topic_pos[t]) == (n, pos), (t, topic_counts[t], topic_pos[t])

    # Non-idempotent stems, for the features test's documented exception list.
    vocab_tokens = set()
    for _, p in corpus.iter_paragraphs():
        vocab_tokens.update(tokenize(p.text))
    unstable = sorted(w for w in vocab_tokens if porter.stem(porter.stem(w)) != porter.stem(w))
    print(f"tokens with non-idempotent stems ({len(unstable)}): {unstable}")
    print("collection checks passed")


if __name__ == "__main__":
    sys.exit(main())
