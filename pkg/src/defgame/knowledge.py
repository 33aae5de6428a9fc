"""Background-knowledge links and their exact truth oracle.

A knowledge link couples surface facts ("The dog is 13 months and a half
old") with a bridging rule-body phrase ("is more than a year old") whose
truth requires a small piece of world knowledge or arithmetic. Links come
in eleven categories. For each category this module provides a sampler
(generate surface facts + bridge with a requested truth value) and a
parser-backed evaluator, so gold labels stay machine-checkable end to end:
the same oracle that scores a freshly sampled link also scores a theory
reloaded from disk, by parsing the phrases themselves.

Numeric categories sample with a safety margin (at least 10% relative gap,
and truth stable under every calendar convention for time units) so no
reasonable reading of the phrases can flip the intended verdict.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .logic import NO_OBJECT, Literal
from .rng import coin, pick

CATEGORIES = (
    "age", "affordance", "colors", "money", "textual_entailment",
    "places", "names", "jobs", "volume", "events", "friends",
)
TRAIN_CATEGORIES = ("age", "money", "friends", "textual_entailment", "affordance", "places")
TEST_CATEGORIES = ("names", "jobs", "volume", "events", "colors")


class UnsupportedCategory(ValueError):
    pass


class UnknownUnit(ValueError):
    pass


class NonpositiveDimension(ValueError):
    pass


class UnknownForeignPhrase(ValueError):
    """The phrase matches no category grammar; the oracle cannot judge it."""


# ---------------------------------------------------------------------------
# Unit arithmetic
# ---------------------------------------------------------------------------

_DAYS_PER = {"day": 1.0, "week": 7.0, "month": 30.0, "year": 365.0}


def convert_time(value: float, from_unit: str, to_unit: str) -> float:
    """Convert between day/week/month/year under the fixed conventions
    week=7d, month=30d, year=365d."""
    for u in (from_unit, to_unit):
        if u.rstrip("s") not in _DAYS_PER:
            raise UnknownUnit(u)
    days = value * _DAYS_PER[from_unit.rstrip("s")]
    return days / _DAYS_PER[to_unit.rstrip("s")]


def fits_in_box(obj: tuple, box: tuple[float, float, float]) -> bool:
    """Whether a sphere ("sphere", radius) or a thin slab ("slab", h, w)
    fits inside an a x b x c box. A sphere fits iff its diameter is at most
    the smallest box dimension; a slab fits iff its two dimensions fit two
    distinct box dimensions under some assignment."""
    dims = tuple(float(d) for d in box)
    if any(d <= 0 for d in dims):
        raise NonpositiveDimension(str(box))
    kind = obj[0]
    if kind == "sphere":
        radius = float(obj[1])
        if radius <= 0:
            raise NonpositiveDimension(str(obj))
        return 2 * radius <= min(dims)
    if kind == "slab":
        h, w = float(obj[1]), float(obj[2])
        if h <= 0 or w <= 0:
            raise NonpositiveDimension(str(obj))
        for i in range(3):
            for j in range(3):
                if i != j and h <= dims[i] and w <= dims[j]:
                    return True
        return False
    raise ValueError(f"unknown object kind {kind!r}")


# ---------------------------------------------------------------------------
# Curated tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KnowledgeTables:
    places: dict[str, str]                      # city -> country
    jobs: dict[str, str]                        # job -> industry
    events: dict[str, int]                      # event phrase -> year
    entailment: dict[str, str]                  # fact phrase -> bridge phrase
    affordance: dict[str, tuple[str, tuple[str, ...]]]   # key -> (bridge, objects)
    color_groups: dict[str, tuple[str, tuple[str, ...]]]  # key -> (bridge, colors)
    palette: tuple[str, ...]
    names: tuple[str, ...]

    @property
    def countries(self) -> list[str]:
        out: dict[str, None] = {}
        for c in self.places.values():
            out.setdefault(c, None)
        return list(out)

    @property
    def industries(self) -> list[str]:
        out: dict[str, None] = {}
        for c in self.jobs.values():
            out.setdefault(c, None)
        return list(out)


def _read_lines(path: Path) -> list[str]:
    return [ln for ln in path.read_text(encoding="utf-8").splitlines()
            if ln.strip() and not ln.startswith("#")]


def load_tables(data_dir: Optional[Path] = None) -> KnowledgeTables:
    if data_dir is None:
        data_dir = default_data_dir() / "knowledge"
    places = dict(ln.split("|") for ln in _read_lines(data_dir / "places.txt"))
    jobs = dict(ln.split("|") for ln in _read_lines(data_dir / "jobs.txt"))
    events = {k: int(v) for k, v in
              (ln.split("|") for ln in _read_lines(data_dir / "events.txt"))}
    entailment = dict(ln.split("|") for ln in _read_lines(data_dir / "entailment.txt"))
    affordance: dict[str, tuple[str, tuple[str, ...]]] = {}
    for ln in _read_lines(data_dir / "affordance.txt"):
        key, bridge, objs = ln.split("|")
        affordance[key] = (bridge, tuple(objs.split(",")))
    color_groups: dict[str, tuple[str, tuple[str, ...]]] = {}
    palette: tuple[str, ...] = ()
    for ln in _read_lines(data_dir / "colors.txt"):
        key, bridge, colors = ln.split("|")
        if key == "palette":
            palette = tuple(colors.split(","))
        else:
            color_groups[key] = (bridge, tuple(colors.split(",")))
    names = tuple(_read_lines(data_dir / "names.txt"))
    return KnowledgeTables(places, jobs, events, entailment, affordance,
                           color_groups, palette, names)


def default_data_dir() -> Path:
    return Path(str(resources.files("defgame") / "data"))


@lru_cache(maxsize=4)
def _cached_tables(data_dir: Optional[str]) -> KnowledgeTables:
    return load_tables(Path(data_dir) if data_dir else None)


def get_tables(data_dir: Optional[Path] = None) -> KnowledgeTables:
    return _cached_tables(str(data_dir) if data_dir else None)


# ---------------------------------------------------------------------------
# Links
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KnowledgeLink:
    category: str
    subject: str
    partners: tuple[str, ...]
    surface_facts: tuple[Literal, ...]   # positive phrase literals
    bridge: Literal                      # phrase literal on the subject
    holds: bool


def evaluate_link(link: KnowledgeLink, tables: Optional[KnowledgeTables] = None) -> bool:
    """Exact truth of the bridge given the surface facts. Goes through the
    same phrase parser the solver uses, so sampler and solver can never
    disagree."""
    oracle = KnowledgeOracle(tables or get_tables())
    verdict = oracle.evaluate(link.bridge, link.surface_facts)
    if verdict is None:
        raise ValueError(f"link facts insufficient for bridge {link.bridge.predicate!r}")
    return verdict


def phrase_fact(entity: str, phrase: str) -> Literal:
    return Literal(entity, phrase, NO_OBJECT, True)


# ---------------------------------------------------------------------------
# Phrase grammar
# ---------------------------------------------------------------------------

_NUMBER_WORDS = (
    "zero one two three four five six seven eight nine ten eleven twelve "
    "thirteen fourteen fifteen sixteen seventeen eighteen nineteen twenty"
).split()


def _num_word(n: int) -> str:
    return _NUMBER_WORDS[n]


_AGE_FACT = re.compile(r"^is (\d+) (day|week|month|year)s?( and a half)? old$")
_AGE_BRIDGE = re.compile(
    r"^is (more|less) than (?:(a) |(\d+) )(day|week|month|year)s?( and a half)? old$")
_MONEY_FACT = re.compile(r"^has (\d+) dollars$")
_MONEY_COMBINED = re.compile(
    r"^has (more|less) money than the ([a-z][a-z ]+?) and the ([a-z][a-z ]+?) combined$")
_MONEY_SINGLE = re.compile(r"^has (more|less) money than the ([a-z][a-z ]+)$")
_MONEY_THRESHOLD = re.compile(
    r"^and the ([a-z][a-z ]+) together have (more|less) than (\d+) dollars$")
_FRIENDS_FACT_PLAIN = re.compile(r"^has (\d+) friends$")
_FRIENDS_FACT_SPLIT = re.compile(
    r"^has ([a-z]+) friends that are ([a-z]+) and ([a-z]+) that are not$")
_FRIENDS_BRIDGE = re.compile(r"^has (more|less) than (\d+) friends$")
_NAMES_FACT = re.compile(r"^is named ([A-Z][a-z]+)$")
_NAMES_BRIDGE = re.compile(
    r"^has a name that starts with the same letter as the ([a-z][a-z ]+)'s name$")
_PLACES_FACT = re.compile(r"^is currently in ([A-Za-z][A-Za-z ]*)$")
_JOBS_FACT = re.compile(r"^is an? ([a-z][a-z ]+)$")
_JOBS_BRIDGE = re.compile(r"^works in ([a-z][a-z ]+)$")
_EVENTS_FACT = re.compile(r"^is watching a movie that was released in (\d{4})$")
_EVENTS_BRIDGE = re.compile(r"^is watching a movie that was released (before|after) (.+)$")
_NUM = r"(\d+(?:\.\d+)?)"
_VOLUME_BALL_R = re.compile(rf"^has a ball with a radius of {_NUM} inches$")
_VOLUME_BALL_D = re.compile(rf"^has a ball with a diameter of {_NUM} inches$")
_VOLUME_NOTEBOOK = re.compile(
    rf"^has a notebook with a height of {_NUM} inches and a width of {_NUM} inches$")
_VOLUME_BRIDGE = re.compile(
    rf"^has a (ball|notebook) that fits in a {_NUM} x {_NUM} x {_NUM} inches box$")
_CARD_FACT = re.compile(r"^has a card that is ([a-z]+) in color$")


def _age_days(num: float, unit: str, month_days: float = 30.0, year_days: float = 365.0) -> float:
    per = {"day": 1.0, "week": 7.0, "month": month_days, "year": year_days}
    return num * per[unit]


def age_verdict(fact_phrase: str, bridge_phrase: str,
                month_days: float = 30.0, year_days: float = 365.0) -> Optional[bool]:
    """Truth of an age bridge against an age fact under configurable
    calendar conventions (used by the margin-robustness sweep)."""
    mf = _AGE_FACT.match(fact_phrase)
    mb = _AGE_BRIDGE.match(bridge_phrase)
    if not mf or not mb:
        return None
    fval = int(mf.group(1)) + (0.5 if mf.group(3) else 0.0)
    funit = mf.group(2)
    rel = mb.group(1)
    bval = (1 if mb.group(2) else int(mb.group(3))) + (0.5 if mb.group(5) else 0.0)
    bunit = mb.group(4)
    fd = _age_days(fval, funit, month_days, year_days)
    bd = _age_days(bval, bunit, month_days, year_days)
    return fd > bd if rel == "more" else fd < bd


# ---------------------------------------------------------------------------
# Oracle: evaluate a bridge phrase against theory facts
# ---------------------------------------------------------------------------

class KnowledgeOracle:
    """Judges out-of-vocabulary rule-body phrases from the theory's surface
    facts. Returns True/False when determined, None when the needed facts
    are absent (the bridge is then simply unprovable), and raises
    UnknownForeignPhrase for phrases outside the category grammars."""

    def __init__(self, tables: Optional[KnowledgeTables] = None):
        self.tables = tables or get_tables()

    def evaluate(self, bridge: Literal, facts: Sequence[Literal]) -> Optional[bool]:
        phrases: dict[str, list[str]] = {}
        for f in facts:
            if f.obj == NO_OBJECT and f.positive:
                phrases.setdefault(f.subject, []).append(f.predicate)
        return self.evaluate_phrase(bridge.subject, bridge.predicate, phrases)

    def evaluate_phrase(self, subject: str, phrase: str,
                        phrases: dict[str, list[str]]) -> Optional[bool]:
        mine = phrases.get(subject, [])

        m = _AGE_BRIDGE.match(phrase)
        if m:
            for p in mine:
                if _AGE_FACT.match(p):
                    return age_verdict(p, phrase)
            return None

        m = _MONEY_COMBINED.match(phrase)
        if m:
            rel, p1, p2 = m.groups()
            return self._money(rel, subject, [p1, p2], phrases)
        m = _MONEY_THRESHOLD.match(phrase)
        if m:
            partner, rel, limit = m.groups()
            amounts = [self._money_amount(e, phrases) for e in (subject, partner)]
            if any(a is None for a in amounts):
                return None
            total = sum(amounts)  # type: ignore[arg-type]
            return total > int(limit) if rel == "more" else total < int(limit)
        m = _MONEY_SINGLE.match(phrase)
        if m and " and the " not in m.group(2):
            rel, p1 = m.groups()
            return self._money(rel, subject, [p1], phrases)

        m = _FRIENDS_BRIDGE.match(phrase)
        if m:
            rel, limit = m.groups()
            total = self._friend_count(mine)
            if total is None:
                return None
            return total > int(limit) if rel == "more" else total < int(limit)

        m = _NAMES_BRIDGE.match(phrase)
        if m:
            mine_name = self._name_of(mine)
            partner_name = self._name_of(phrases.get(m.group(1), []))
            if mine_name is None or partner_name is None:
                return None
            return mine_name[0].lower() == partner_name[0].lower()

        m = _PLACES_FACT.match(phrase)  # bridge shares the fact grammar
        if m:
            target = m.group(1)
            for p in mine:
                mf = _PLACES_FACT.match(p)
                if mf:
                    city = mf.group(1)
                    if target in self.tables.countries:
                        return self.tables.places.get(city) == target
                    return city == target
            return None

        m = _JOBS_BRIDGE.match(phrase)
        if m:
            for p in mine:
                mf = _JOBS_FACT.match(p)
                if mf and mf.group(1) in self.tables.jobs:
                    return self.tables.jobs[mf.group(1)] == m.group(1)
            return None

        m = _EVENTS_BRIDGE.match(phrase)
        if m:
            rel, event = m.groups()
            if event not in self.tables.events:
                raise UnknownForeignPhrase(f"unknown event {event!r}")
            for p in mine:
                mf = _EVENTS_FACT.match(p)
                if mf:
                    year = int(mf.group(1))
                    eyear = self.tables.events[event]
                    return year < eyear if rel == "before" else year > eyear
            return None

        m = _VOLUME_BRIDGE.match(phrase)
        if m:
            kind = m.group(1)
            box = (float(m.group(2)), float(m.group(3)), float(m.group(4)))
            return self._volume(kind, box, mine)

        for bridge_phrase, objects in self.tables.affordance.values():
            if phrase == bridge_phrase:
                owned = self._owned_objects(mine)
                if not owned:
                    return None
                return any(o in objects for o in owned)

        for bridge_phrase, colors in self.tables.color_groups.values():
            if phrase == bridge_phrase:
                for p in mine:
                    mf = _CARD_FACT.match(p)
                    if mf:
                        return mf.group(1) in colors
                return None

        if phrase in self.tables.entailment.values():
            for p in mine:
                if self.tables.entailment.get(p) == phrase:
                    return True
            if any(p in self.tables.entailment for p in mine):
                return False
            return None

        raise UnknownForeignPhrase(phrase)

    def _money_amount(self, entity: str, phrases: dict[str, list[str]]) -> Optional[int]:
        for p in phrases.get(entity, []):
            m = _MONEY_FACT.match(p)
            if m:
                return int(m.group(1))
        return None

    def _money(self, rel: str, subject: str, partners: list[str],
               phrases: dict[str, list[str]]) -> Optional[bool]:
        mine = self._money_amount(subject, phrases)
        theirs = [self._money_amount(p, phrases) for p in partners]
        if mine is None or any(t is None for t in theirs):
            return None
        other = sum(theirs)  # type: ignore[arg-type]
        return mine > other if rel == "more" else mine < other

    def _friend_count(self, mine: list[str]) -> Optional[int]:
        for p in mine:
            m = _FRIENDS_FACT_PLAIN.match(p)
            if m:
                return int(m.group(1))
            m = _FRIENDS_FACT_SPLIT.match(p)
            if m and m.group(1) in _NUMBER_WORDS and m.group(3) in _NUMBER_WORDS:
                return _NUMBER_WORDS.index(m.group(1)) + _NUMBER_WORDS.index(m.group(3))
        return None

    def _name_of(self, mine: list[str]) -> Optional[str]:
        for p in mine:
            m = _NAMES_FACT.match(p)
            if m:
                return m.group(1)
        return None

    def _owned_objects(self, mine: list[str]) -> list[str]:
        all_objects = {o for _, objs in self.tables.affordance.values() for o in objs}
        owned = []
        for p in mine:
            m = re.match(r"^has an? ([a-z][a-z ]+)$", p)
            if m and m.group(1) in all_objects:
                owned.append(m.group(1))
        return owned

    def _volume(self, kind: str, box: tuple[float, float, float],
                mine: list[str]) -> Optional[bool]:
        for p in mine:
            m = _VOLUME_BALL_R.match(p)
            if m and kind == "ball":
                return fits_in_box(("sphere", float(m.group(1))), box)
            m = _VOLUME_BALL_D.match(p)
            if m and kind == "ball":
                return fits_in_box(("sphere", float(m.group(1)) / 2), box)
            m = _VOLUME_NOTEBOOK.match(p)
            if m and kind == "notebook":
                return fits_in_box(("slab", float(m.group(1)), float(m.group(2))), box)
        return None

# ---------------------------------------------------------------------------
# Samplers: build a link with a requested truth value
# ---------------------------------------------------------------------------

_AGE_UNITS = ("day", "week", "month", "year")
_AGE_RANGES = {"day": (10, 600), "week": (2, 80), "month": (2, 40), "year": (1, 12)}
_FRIEND_ADJECTIVES = ("nice", "smart", "playful", "kind", "loyal", "easygoing")


def _age_phrase_value(n: int, half: bool, unit: str) -> str:
    plural = "s" if n != 1 else ""
    if half:
        return f"{n} {unit}{plural} and a half"
    return f"{n} {unit}{plural}"


def _age_bounds(num: float, unit: str) -> tuple[float, float]:
    """Day-range of a displayed value across calendar conventions."""
    lo = _age_days(num, unit, month_days=28, year_days=365)
    hi = _age_days(num, unit, month_days=31, year_days=366)
    return lo, hi


def _sample_age(tables: KnowledgeTables, holds: bool, subject: str,
                rng: np.random.Generator, draw_partner) -> KnowledgeLink:
    for _ in range(500):
        funit = pick(rng, _AGE_UNITS)
        lo, hi = _AGE_RANGES[funit]
        fnum = int(rng.integers(lo, hi + 1))
        fhalf = funit != "day" and coin(rng, 0.3)
        rel = pick(rng, ("more", "less"))
        bunit = pick(rng, _AGE_UNITS)
        blo, bhi = _AGE_RANGES[bunit]
        bnum = int(rng.integers(1, bhi + 1))
        bhalf = bunit != "day" and coin(rng, 0.3)
        f_lo, f_hi = _age_bounds(fnum + 0.5 * fhalf, funit)
        b_lo, b_hi = _age_bounds(bnum + 0.5 * bhalf, bunit)
        # verdict must survive any convention, with a 10% relative gap
        truth_wanted = holds if rel == "more" else not holds
        if truth_wanted:  # need fact clearly above bridge
            stable = f_lo > 1.1 * b_hi
        else:
            stable = 1.1 * f_hi < b_lo
        if not stable:
            continue
        bval = "a" if (bnum == 1 and not bhalf) else _age_phrase_value(bnum, bhalf, bunit)
        bridge_txt = (f"is {rel} than {bval} {bunit} old" if bval == "a"
                      else f"is {rel} than {_age_phrase_value(bnum, bhalf, bunit)} old")
        fact_txt = f"is {_age_phrase_value(fnum, fhalf, funit)} old"
        return KnowledgeLink(
            "age", subject, (), (phrase_fact(subject, fact_txt),),
            phrase_fact(subject, bridge_txt), holds)
    raise RuntimeError("age sampler failed to find a stable pair")


def _margin_ok(a: float, b: float) -> bool:
    return abs(a - b) >= max(5.0, 0.1 * max(a, b))


def _sample_money(tables: KnowledgeTables, holds: bool, subject: str,
                  rng: np.random.Generator, draw_partner) -> KnowledgeLink:
    form = pick(rng, ("single", "combined", "threshold"))
    rel = pick(rng, ("more", "less"))
    partners = tuple(draw_partner() for _ in range(2 if form == "combined" else 1))
    for _ in range(500):
        if form == "single":
            amounts = [int(rng.integers(10, 121)) for _ in range(2)]
            lhs, rhs = amounts[0], amounts[1]
            bridge_txt = f"has {rel} money than the {partners[0]}"
        elif form == "combined":
            amounts = [int(rng.integers(10, 121)) for _ in range(3)]
            lhs, rhs = amounts[0], amounts[1] + amounts[2]
            bridge_txt = (f"has {rel} money than the {partners[0]} "
                          f"and the {partners[1]} combined")
        else:
            amounts = [int(rng.integers(10, 121)) for _ in range(2)]
            limit = int(rng.integers(30, 260))
            lhs, rhs = amounts[0] + amounts[1], limit
            bridge_txt = (f"and the {partners[0]} together have "
                          f"{rel} than {limit} dollars")
        truth = lhs > rhs if rel == "more" else lhs < rhs
        if truth != holds or not _margin_ok(lhs, rhs):
            continue
        facts = tuple(phrase_fact(e, f"has {a} dollars")
                      for e, a in zip((subject, *partners), amounts))
        return KnowledgeLink("money", subject, partners, facts,
                             phrase_fact(subject, bridge_txt), holds)
    raise RuntimeError("money sampler failed to find a stable pair")


def _sample_friends(tables: KnowledgeTables, holds: bool, subject: str,
                    rng: np.random.Generator, draw_partner) -> KnowledgeLink:
    for _ in range(500):
        total = int(rng.integers(2, 19))
        rel = pick(rng, ("more", "less"))
        limit = int(rng.integers(1, 21))
        truth = total > limit if rel == "more" else total < limit
        if truth != holds or abs(total - limit) < 2:
            continue
        if coin(rng, 0.5) and total >= 2:
            first = int(rng.integers(1, total))
            adj = pick(rng, _FRIEND_ADJECTIVES)
            fact_txt = (f"has {_num_word(first)} friends that are {adj} "
                        f"and {_num_word(total - first)} that are not")
        else:
            fact_txt = f"has {total} friends"
        bridge_txt = f"has {rel} than {limit} friends"
        return KnowledgeLink("friends", subject, (), (phrase_fact(subject, fact_txt),),
                             phrase_fact(subject, bridge_txt), holds)
    raise RuntimeError("friends sampler failed to find a stable pair")


def _sample_names(tables: KnowledgeTables, holds: bool, subject: str,
                  rng: np.random.Generator, draw_partner) -> KnowledgeLink:
    partner = draw_partner()
    by_letter: dict[str, list[str]] = {}
    for n in tables.names:
        by_letter.setdefault(n[0].lower(), []).append(n)
    if holds:
        letter = pick(rng, sorted(k for k, v in by_letter.items() if len(v) >= 2))
        name_a = pick(rng, by_letter[letter])
        name_b = pick(rng, [n for n in by_letter[letter] if n != name_a])
    else:
        letter_a = pick(rng, sorted(by_letter))
        letter_b = pick(rng, sorted(k for k in by_letter if k != letter_a))
        name_a = pick(rng, by_letter[letter_a])
        name_b = pick(rng, by_letter[letter_b])
    facts = (phrase_fact(subject, f"is named {name_a}"),
             phrase_fact(partner, f"is named {name_b}"))
    bridge_txt = f"has a name that starts with the same letter as the {partner}'s name"
    return KnowledgeLink("names", subject, (partner,), facts,
                         phrase_fact(subject, bridge_txt), holds)


def _sample_places(tables: KnowledgeTables, holds: bool, subject: str,
                   rng: np.random.Generator, draw_partner) -> KnowledgeLink:
    city = pick(rng, sorted(tables.places))
    country = tables.places[city]
    if holds:
        target = country
    else:
        target = pick(rng, sorted(c for c in tables.countries if c != country))
    facts = (phrase_fact(subject, f"is currently in {city}"),)
    return KnowledgeLink("places", subject, (), facts,
                         phrase_fact(subject, f"is currently in {target}"), holds)


def _sample_jobs(tables: KnowledgeTables, holds: bool, subject: str,
                 rng: np.random.Generator, draw_partner) -> KnowledgeLink:
    job = pick(rng, sorted(tables.jobs))
    industry = tables.jobs[job]
    if holds:
        target = industry
    else:
        target = pick(rng, sorted(i for i in tables.industries if i != industry))
    article = "an" if job[0] in "aeiou" else "a"
    facts = (phrase_fact(subject, f"is {article} {job}"),)
    return KnowledgeLink("jobs", subject, (), facts,
                         phrase_fact(subject, f"works in {target}"), holds)


def _sample_events(tables: KnowledgeTables, holds: bool, subject: str,
                   rng: np.random.Generator, draw_partner) -> KnowledgeLink:
    for _ in range(500):
        event = pick(rng, sorted(tables.events))
        eyear = tables.events[event]
        rel = pick(rng, ("before", "after"))
        year = int(rng.integers(1900, 2024))
        truth = year < eyear if rel == "before" else year > eyear
        if truth != holds or abs(year - eyear) < 2:
            continue
        facts = (phrase_fact(subject, f"is watching a movie that was released in {year}"),)
        bridge_txt = f"is watching a movie that was released {rel} {event}"
        return KnowledgeLink("events", subject, (), facts,
                             phrase_fact(subject, bridge_txt), holds)
    raise RuntimeError("events sampler failed to find a stable pair")


def _fmt_dim(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:.1f}"


def _sample_volume(tables: KnowledgeTables, holds: bool, subject: str,
                   rng: np.random.Generator, draw_partner) -> KnowledgeLink:
    kind = pick(rng, ("radius", "diameter", "notebook"))
    for _ in range(500):
        box = tuple(round(float(rng.uniform(12.0, 48.0)), 1) for _ in range(3))
        smallest, largest = min(box), max(box)
        if kind == "notebook":
            if holds:
                h = round(float(rng.uniform(2.0, smallest * 0.88)), 1)
                w = round(float(rng.uniform(2.0, smallest * 0.88)), 1)
            else:
                h = round(float(rng.uniform(largest * 1.12, largest * 2.0)), 1)
                w = round(float(rng.uniform(5.0, 40.0)), 1)
            if fits_in_box(("slab", h, w), box) != holds:
                continue
            fact_txt = (f"has a notebook with a height of {_fmt_dim(h)} inches "
                        f"and a width of {_fmt_dim(w)} inches")
            obj_word = "notebook"
        else:
            if holds:
                diameter = round(float(rng.uniform(4.0, smallest * 0.88)), 1)
            else:
                diameter = round(float(rng.uniform(smallest * 1.12, smallest * 2.5)), 1)
            if kind == "radius":
                radius = round(diameter / 2, 1)
                diameter = radius * 2
                fact_txt = f"has a ball with a radius of {_fmt_dim(radius)} inches"
            else:
                diameter = round(diameter)
                fact_txt = f"has a ball with a diameter of {_fmt_dim(diameter)} inches"
            if fits_in_box(("sphere", diameter / 2, ), box) != holds:
                continue
            obj_word = "ball"
        dims = " x ".join(_fmt_dim(d) for d in box)
        bridge_txt = f"has a {obj_word} that fits in a {dims} inches box"
        return KnowledgeLink("volume", subject, (), (phrase_fact(subject, fact_txt),),
                             phrase_fact(subject, bridge_txt), holds)
    raise RuntimeError("volume sampler failed to find a stable pair")


def _sample_affordance(tables: KnowledgeTables, holds: bool, subject: str,
                       rng: np.random.Generator, draw_partner) -> KnowledgeLink:
    key = pick(rng, sorted(tables.affordance))
    bridge_txt, objects = tables.affordance[key]
    if holds:
        obj = pick(rng, objects)
    else:
        others = [o for k, (_, objs) in sorted(tables.affordance.items())
                  if k != key for o in objs]
        obj = pick(rng, others)
    article = "an" if obj[0] in "aeiou" else "a"
    facts = (phrase_fact(subject, f"has {article} {obj}"),)
    return KnowledgeLink("affordance", subject, (), facts,
                         phrase_fact(subject, bridge_txt), holds)


def _sample_colors(tables: KnowledgeTables, holds: bool, subject: str,
                   rng: np.random.Generator, draw_partner) -> KnowledgeLink:
    key = pick(rng, sorted(tables.color_groups))
    bridge_txt, colors = tables.color_groups[key]
    if holds:
        color = pick(rng, colors)
    else:
        color = pick(rng, [c for c in tables.palette if c not in colors])
    facts = (phrase_fact(subject, f"has a card that is {color} in color"),)
    return KnowledgeLink("colors", subject, (), facts,
                         phrase_fact(subject, bridge_txt), holds)


def _sample_entailment(tables: KnowledgeTables, holds: bool, subject: str,
                       rng: np.random.Generator, draw_partner) -> KnowledgeLink:
    pairs = sorted(tables.entailment.items())
    fact_phrase, bridge_txt = pick(rng, pairs)
    if not holds:
        other = pick(rng, [f for f, b in pairs if b != bridge_txt])
        fact_phrase = other
    facts = (phrase_fact(subject, fact_phrase),)
    return KnowledgeLink("textual_entailment", subject, (), facts,
                         phrase_fact(subject, bridge_txt), holds)


_SAMPLERS: dict[str, Callable] = {
    "age": _sample_age,
    "money": _sample_money,
    "friends": _sample_friends,
    "names": _sample_names,
    "places": _sample_places,
    "jobs": _sample_jobs,
    "events": _sample_events,
    "volume": _sample_volume,
    "affordance": _sample_affordance,
    "colors": _sample_colors,
    "textual_entailment": _sample_entailment,
}


def sample_knowledge_link(category: str, target_holds: bool, subject: str,
                          rng: np.random.Generator,
                          draw_partner: Optional[Callable[[], str]] = None,
                          tables: Optional[KnowledgeTables] = None) -> KnowledgeLink:
    """Build a link of the given category whose bridge truth equals
    ``target_holds``. Categories comparing the subject to other players call
    ``draw_partner`` for fresh entity names."""
    if category not in _SAMPLERS:
        raise UnsupportedCategory(category)
    link = _SAMPLERS[category](tables or get_tables(), target_holds, subject,
                               rng, draw_partner)
    return link
