"""Synthetic 10-K corpus generator with exact gold boundaries.

Builds HTML and plain-text filings that exercise the failure modes the
pipeline must survive: tables of contents (hyperlinked or not), in-body
cross-references to other items, alias and roman-numeral headings, missing
items, repeated page furniture. Every generated filing carries gold title
offsets into the parsed canonical text, computed by tracking the parser's
separator rules during generation and verified by re-parsing, so evaluation
can use tolerance zero.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, fields, replace
from html import escape

from .docmodel import DocumentFormat, parse_filing
from .errors import ConfigError
from .ingest import RawFiling
from .schema import ALL_ITEMS, ITEM_INTRODUCED, ROMAN_NUMERALS, ItemId

_COMPANY_FIRST = (
    "Apex", "Granite", "Northfield", "Bluewater", "Summit", "Ironwood",
    "Calder", "Meridian", "Pinnacle", "Redstone", "Harbor", "Linden",
    "Vanguard", "Crestline", "Oakmont", "Silverton",
)
_COMPANY_CORE = (
    "Industries", "Holdings", "Group", "Technologies", "Resources",
    "Logistics", "Energy", "Foods", "Materials", "Instruments",
)
_COMPANY_SUFFIX = ("Inc.", "Corp.", "Corporation", "Ltd.", "Co.")

# Filler vocabulary is chosen to never collide with an item title or alias:
# no "business", "properties", "reserved", and no word pair that completes a
# multi-word alias. Candidate extraction from body prose must come only from
# the references the generator plants on purpose.
_SUBJECTS = (
    "The company", "Management", "The segment", "Our network", "The board",
    "The division", "Each facility", "The registrant", "Our platform",
    "The supply chain",
)
_VERBS = (
    "expanded", "maintained", "evaluated", "reduced", "increased",
    "restructured", "consolidated", "monitored", "diversified", "upgraded",
)
_OBJECTS = (
    "production capacity", "operating margins", "vendor contracts",
    "regional distribution", "capital expenditures", "inventory levels",
    "customer retention", "logistics throughput", "research spending",
    "working capital", "long-term debt", "employee headcount",
)
_TAILS = (
    "during the period", "across all regions", "relative to the prior year",
    "in response to demand", "under the revised plan", "at a measured pace",
    "despite cost pressures", "through internal programs",
)

_REF_TEMPLATES = (
    "See {title_ref} for additional detail.",
    "Refer to {title_ref} of this report.",
    "This topic is discussed in {title_ref}.",
    "Further detail appears under {title_ref}.",
)


@dataclass(frozen=True)
class GoldItem:
    item: ItemId
    offset: int
    title_text: str


@dataclass(frozen=True)
class GoldStructure:
    """Known-true boundaries for one document, for judging reconstructions."""

    serial: str
    assignments: tuple[tuple[ItemId, int], ...]
    intentionally_missing: tuple[ItemId, ...]


@dataclass(frozen=True)
class SyntheticFiling:
    serial: str
    data: bytes
    format: DocumentFormat
    fiscal_year: int
    gold: tuple[GoldItem, ...]
    missing: tuple[ItemId, ...] = ()

    def as_raw(self) -> RawFiling:
        return RawFiling(serial=self.serial, bytes=self.data, fetched_at=0.0)

    def gold_structure(self) -> GoldStructure:
        return GoldStructure(
            serial=self.serial,
            assignments=tuple((g.item, g.offset) for g in self.gold),
            intentionally_missing=self.missing,
        )


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for corpus difficulty. Defaults describe the standard eval mix."""

    n_docs: int = 200
    seed: int = 20260501
    p_plaintext: float = 0.10
    p_toc: float = 0.80
    p_toc_hyperlinked: float = 0.80
    p_toc_part_rows: float = 0.50
    p_missing: float = 0.04
    p_alias_title: float = 0.25
    p_alias_only: float = 0.06
    p_roman: float = 0.08
    p_uppercase: float = 0.30
    forward_ref_rate: float = 0.12
    backward_ref_rate: float = 0.10
    p_ref_hyperlink: float = 0.50
    signal_strength: float = 0.80
    p_centered_title: float = 0.40
    p_footer: float = 0.50
    year_min: int = 2015
    year_max: int = 2023

    def __post_init__(self):
        if self.n_docs < 1:
            raise ConfigError("n_docs must be at least 1")
        for f in fields(self):
            if f.name.startswith("p_") or f.name.endswith("_rate"):
                value = getattr(self, f.name)
                if not 0.0 <= value <= 1.0:
                    raise ConfigError(f"{f.name} must be in [0,1], got {value}")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise ConfigError("signal_strength must be in [0,1]")
        if self.year_min > self.year_max:
            raise ConfigError("year_min must not exceed year_max")

    def noise_free(self) -> SynthConfig:
        """Variant with every distractor channel switched off.

        What remains is one unambiguous candidate per present item, so any
        scoring policy should reconstruct the same structures.
        """
        return replace(
            self,
            p_toc=0.0,
            forward_ref_rate=0.0,
            backward_ref_rate=0.0,
            p_alias_only=0.0,
            signal_strength=1.0,
        )


# Canonical corpora: evaluation uses the defaults above; the scorer trains
# on a disjoint corpus (different seed) so headline numbers are out of
# sample. Calibration history lives with the corpus knobs, not callers.
TRAINING_CONFIG = SynthConfig(n_docs=100, seed=777)
EVALUATION_CONFIG = SynthConfig()


class _HtmlBuilder:
    """Accumulates HTML fragments and the canonical text the parser will emit.

    The parser joins block-level contributions with a single newline and
    collapses intra-block whitespace to single spaces; emit_text applies the
    same rule so returned offsets index the parsed plain text exactly.
    """

    def __init__(self):
        self.fragments: list[str] = []
        self._parts: list[str] = []
        self._length = 0

    def emit_html(self, fragment: str) -> None:
        self.fragments.append(fragment)

    def emit_text(self, text: str) -> int:
        sep = "\n" if self._parts else ""
        offset = self._length + len(sep)
        self._parts.append(sep + text)
        self._length = offset + len(text)
        return offset

    def block(self, text: str, style: str = "", tag: str = "div") -> int:
        attr = f' style="{style}"' if style else ""
        self.emit_html(f"<{tag}{attr}>{escape(text, quote=False)}</{tag}>")
        return self.emit_text(text)

    def render(self) -> bytes:
        body = "\n".join(self.fragments)
        return f"<html>\n<body>\n{body}\n</body>\n</html>\n".encode("utf-8")


class _PlainBuilder:
    def __init__(self):
        self._lines: list[str] = []
        self._length = 0

    def line(self, text: str) -> int:
        offset = self._length
        self._lines.append(text)
        self._length += len(text) + 1
        return offset

    def blank(self) -> None:
        self.line("")

    def render(self) -> bytes:
        return ("\n".join(self._lines) + "\n").encode("utf-8")


def _sentence(rng: random.Random) -> str:
    return (
        f"{rng.choice(_SUBJECTS)} {rng.choice(_VERBS)} "
        f"{rng.choice(_OBJECTS)} {rng.choice(_TAILS)}."
    )


def _paragraph(rng: random.Random, n_sentences: int) -> str:
    return " ".join(_sentence(rng) for _ in range(n_sentences))


@dataclass
class _ItemPlan:
    item: ItemId
    title_text: str
    heading: str
    strong: bool
    centered: bool
    n_paragraphs: int
    refs: list[tuple[ItemId, str, bool]] = field(default_factory=list)


_ROMAN_OF_NUMBER = {v: k for k, v in ROMAN_NUMERALS.items()}


def _item_number_text(item: ItemId, roman: bool) -> str:
    letter = item.letter or ""
    if roman:
        return f"{_ROMAN_OF_NUMBER[item.number].upper()}{letter}"
    return f"{item.number}{letter}"


def _plan_items(
    rng: random.Random, cfg: SynthConfig, year: int, titles: dict[ItemId, tuple[str, ...]]
) -> tuple[list[_ItemPlan], list[ItemId], bool]:
    present = []
    missing = []
    for item in ALL_ITEMS:
        introduced = ITEM_INTRODUCED.get(item.label)
        if introduced is not None and year < introduced:
            missing.append(item)
            continue
        if item.label != "1" and rng.random() < cfg.p_missing:
            missing.append(item)
            continue
        present.append(item)

    roman = rng.random() < cfg.p_roman
    plans = []
    for item in present:
        options = titles[item]
        title = options[0]
        if len(options) > 1 and rng.random() < cfg.p_alias_title:
            title = rng.choice(options[1:])
        if item.label == "6" and rng.random() < 0.5:
            title = f"[{title}]"
        alias_only = rng.random() < cfg.p_alias_only and not title.startswith("[")
        if alias_only:
            heading = title
        else:
            sep = rng.choice((". ", ". ", ". ", " - ", ": "))
            heading = f"Item {_item_number_text(item, roman)}{sep}{title}"
        if rng.random() < cfg.p_uppercase:
            heading = heading.upper()
        if item.label == "6":
            n_paragraphs = rng.choice((0, 1))
        elif item.label in ("1", "7", "8", "1A"):
            n_paragraphs = rng.randint(2, 5)
        else:
            n_paragraphs = rng.randint(1, 3)
        plans.append(
            _ItemPlan(
                item=item,
                title_text=title,
                heading=heading,
                strong=rng.random() < cfg.signal_strength,
                centered=rng.random() < cfg.p_centered_title,
                n_paragraphs=n_paragraphs,
            )
        )

    # Plant cross-references. Forward references (to a later item) are the
    # ambiguity that makes naive earliest-match selection fail; backward
    # references are harmless under monotone selection but add realism.
    canonical = {p.item: titles[p.item][0] for p in plans}
    for i, plan in enumerate(plans):
        if plan.n_paragraphs == 0:
            continue
        if i + 1 < len(plans) and rng.random() < cfg.forward_ref_rate:
            target = plans[rng.randint(i + 1, len(plans) - 1)].item
            plan.refs.append(
                (target, canonical[target], rng.random() < cfg.p_ref_hyperlink)
            )
        if i > 0 and rng.random() < cfg.backward_ref_rate:
            target = plans[rng.randint(0, i - 1)].item
            plan.refs.append(
                (target, canonical[target], rng.random() < cfg.p_ref_hyperlink)
            )
    return plans, missing, roman


def _ref_text(rng: random.Random, item: ItemId, title: str) -> tuple[str, str]:
    """Full reference sentence and the embedded 'Item N. Title' span."""
    span = f"Item {item.number}{item.letter or ''}. {title}"
    template = rng.choice(_REF_TEMPLATES)
    return template.format(title_ref=span), span


def _company(rng: random.Random) -> str:
    return (
        f"{rng.choice(_COMPANY_FIRST)} {rng.choice(_COMPANY_CORE)} "
        f"{rng.choice(_COMPANY_SUFFIX)}"
    )


_PART_ROMAN = {1: "I", 2: "II", 3: "III", 4: "IV"}


def _build_html(
    rng: random.Random,
    cfg: SynthConfig,
    year: int,
    plans: list[_ItemPlan],
    roman: bool,
) -> tuple[bytes, list[GoldItem]]:
    b = _HtmlBuilder()
    company = _company(rng)
    b.block("UNITED STATES", "text-align:center")
    b.block("SECURITIES AND EXCHANGE COMMISSION", "text-align:center;font-weight:bold")
    b.block("Washington, D.C. 20549", "text-align:center")
    b.block("FORM 10-K", "text-align:center;font-weight:bold;font-size:16pt")
    b.block(
        "ANNUAL REPORT PURSUANT TO SECTION 13 OR 15(d) OF THE SECURITIES "
        "EXCHANGE ACT OF 1934",
        "text-align:center",
    )
    b.block(f"For the fiscal year ended December 31, {year}", "text-align:center")
    b.block(company, "text-align:center;font-weight:bold;font-size:14pt")
    b.block("(Exact name of registrant as specified in its charter)", "text-align:center")
    b.block(f"Commission File Number 001-{rng.randint(10000, 39999)}")

    if rng.random() < cfg.p_toc:
        hyperlinked = rng.random() < cfg.p_toc_hyperlinked
        part_rows = rng.random() < cfg.p_toc_part_rows
        b.block("TABLE OF CONTENTS", "text-align:center;font-weight:bold")
        b.emit_html("<table>")
        page = 3
        seen_parts: set[int] = set()
        for plan in plans:
            if part_rows and plan.item.part not in seen_parts:
                seen_parts.add(plan.item.part)
                b.emit_html(f"<tr><td>PART {_PART_ROMAN[plan.item.part]}</td></tr>")
                b.emit_text(f"PART {_PART_ROMAN[plan.item.part]}")
            label = f"Item {_item_number_text(plan.item, roman)}."
            cells = [label, plan.title_text, str(page)]
            b.emit_html("<tr>")
            for i, cell in enumerate(cells):
                inner = escape(cell, quote=False)
                if hyperlinked and i < 2:
                    inner = f'<a href="#itm_{plan.item.label}">{inner}</a>'
                b.emit_html(f"<td>{inner}</td>")
                b.emit_text(cell)
            b.emit_html("</tr>")
            page += rng.randint(1, 9)
        b.emit_html("</table>")

    gold: list[GoldItem] = []
    seen_parts = set()
    page = 3
    for plan in plans:
        if plan.item.part not in seen_parts:
            seen_parts.add(plan.item.part)
            b.block(
                f"PART {_PART_ROMAN[plan.item.part]}",
                "text-align:center;font-weight:bold",
            )
        style = ""
        if plan.strong:
            style = "font-weight:bold;font-size:14pt"
            if plan.centered:
                style += ";text-align:center"
        offset = b.block(plan.heading, style)
        gold.append(GoldItem(item=plan.item, offset=offset, title_text=plan.heading))

        refs = list(plan.refs)
        rng.shuffle(refs)
        for p in range(plan.n_paragraphs):
            text = _paragraph(rng, rng.randint(2, 5))
            ref = refs.pop() if refs else None
            if ref is None:
                b.block(text, "" if rng.random() < 0.5 else "font-size:10pt")
                continue
            target, title, linked = ref
            sentence, span = _ref_text(rng, target, title)
            full = f"{text} {sentence}"
            if linked:
                before, _, after = sentence.partition(span)
                b.emit_html(
                    "<p>"
                    + escape(f"{text} {before}", quote=False)
                    + f'<a href="#itm_{target.label}">{escape(span, quote=False)}</a>'
                    + escape(after, quote=False)
                    + "</p>"
                )
                b.emit_text(full)
            else:
                b.block(full, tag="p")
        if rng.random() < cfg.p_footer:
            b.block(f"{company} | {year} Form 10-K", "text-align:center;font-size:8pt")
            b.block(str(page), "text-align:center;font-size:8pt")
            page += rng.randint(1, 6)

    b.block("SIGNATURES", "text-align:center;font-weight:bold")
    b.block(
        "Pursuant to the requirements of Section 13 or 15(d) of the Securities "
        "Exchange Act of 1934, the registrant has duly caused this report to be "
        "signed on its behalf by the undersigned, thereunto duly authorized."
    )
    b.block(f"/s/ {rng.choice(_COMPANY_FIRST)} Halloran, Chief Executive Officer")
    b.block(f"Date: February {rng.randint(10, 28)}, {year + 1}")
    return b.render(), gold


def _build_plaintext(
    rng: random.Random,
    cfg: SynthConfig,
    year: int,
    plans: list[_ItemPlan],
    roman: bool,
) -> tuple[bytes, list[GoldItem]]:
    b = _PlainBuilder()
    company = _company(rng)
    b.line("UNITED STATES")
    b.line("SECURITIES AND EXCHANGE COMMISSION")
    b.line("Washington, D.C. 20549")
    b.blank()
    b.line("FORM 10-K")
    b.blank()
    b.line(f"For the fiscal year ended December 31, {year}")
    b.line(company.upper())
    b.blank()

    if rng.random() < cfg.p_toc:
        b.line("TABLE OF CONTENTS")
        b.blank()
        page = 3
        for plan in plans:
            label = f"Item {_item_number_text(plan.item, roman)}."
            entry = f"{label} {plan.title_text} "
            b.line(entry + "." * max(4, 60 - len(entry)) + f" {page}")
            page += rng.randint(1, 9)
        b.blank()

    gold: list[GoldItem] = []
    seen_parts: set[int] = set()
    page = 3
    for plan in plans:
        if plan.item.part not in seen_parts:
            seen_parts.add(plan.item.part)
            b.line(f"PART {_PART_ROMAN[plan.item.part]}")
            b.blank()
        offset = b.line(plan.heading)
        gold.append(GoldItem(item=plan.item, offset=offset, title_text=plan.heading))
        b.blank()
        refs = list(plan.refs)
        rng.shuffle(refs)
        for _ in range(plan.n_paragraphs):
            text = _paragraph(rng, rng.randint(2, 5))
            if refs:
                target, title, _ = refs.pop()
                sentence, _ = _ref_text(rng, target, title)
                text = f"{text} {sentence}"
            b.line(text)
            b.blank()
        if rng.random() < cfg.p_footer:
            b.line(f"{company} {year} Annual Report")
            b.line(f"- {page} -")
            b.blank()
            page += rng.randint(1, 6)

    b.line("SIGNATURES")
    b.blank()
    b.line(
        "Pursuant to the requirements of Section 13 or 15(d) of the Securities "
        "Exchange Act of 1934, the registrant has duly caused this report to be "
        "signed on its behalf by the undersigned."
    )
    b.line(f"Date: February {rng.randint(10, 28)}, {year + 1}")
    return b.render(), gold


def _verify_offsets(filing: SyntheticFiling) -> None:
    doc = parse_filing(filing.as_raw())
    for g in filing.gold:
        got = doc.plain_text[g.offset : g.offset + len(g.title_text)]
        if got != g.title_text:
            raise AssertionError(
                f"{filing.serial}: gold offset {g.offset} for {g.item} reads "
                f"{got!r}, expected {g.title_text!r}"
            )


def generate_filing(
    rng: random.Random,
    serial: str,
    cfg: SynthConfig,
    titles: dict[ItemId, tuple[str, ...]],
) -> SyntheticFiling:
    year = rng.randint(cfg.year_min, cfg.year_max)
    plans, missing, roman = _plan_items(rng, cfg, year, titles)
    plain = rng.random() < cfg.p_plaintext
    if plain:
        data, gold = _build_plaintext(rng, cfg, year, plans, roman)
        fmt = DocumentFormat.PLAIN_TEXT
    else:
        data, gold = _build_html(rng, cfg, year, plans, roman)
        fmt = DocumentFormat.HTML
    filing = SyntheticFiling(
        serial=serial,
        data=data,
        format=fmt,
        fiscal_year=year,
        gold=tuple(gold),
        missing=tuple(missing),
    )
    _verify_offsets(filing)
    return filing


def generate_corpus(
    cfg: SynthConfig, titles: dict[ItemId, tuple[str, ...]]
) -> list[SyntheticFiling]:
    """Deterministic corpus: same config always yields the same filings."""
    rng = random.Random(cfg.seed)
    corpus = []
    for i in range(cfg.n_docs):
        serial = f"{rng.randint(10**9, 10**10 - 1):010d}-{cfg.seed % 100:02d}-{i:06d}"
        corpus.append(generate_filing(rng, serial, cfg, titles))
    return corpus
