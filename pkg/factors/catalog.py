import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterator, Optional, Tuple

from django.conf import settings

from .exceptions import (
    CatalogFormatError,
    FactorMismatchError,
    FactorParseError,
    UnknownFactorError,
)
from .serializers import FACTOR_LABEL_PATTERN, FactorRecordSerializer

logger = logging.getLogger(__name__)


class Side(str, Enum):
    P = "P"
    D = "D"


@dataclass(frozen=True)
class Factor:
    id: int
    label: str
    side: Side
    # True cuando la etiqueta no viene de material citado (ver export_catalog)
    provisional: bool = False

    def __post_init__(self):
        if not self.label or any(ch.isspace() for ch in self.label):
            raise ValueError(f"etiqueta inválida para F{self.id}: {self.label!r}")

    @property
    def code(self) -> str:
        return f"F{self.id}"

    def render(self) -> str:
        return f"F{self.id} {self.label} ({self.side.value})"


# =========================
# CATÁLOGO COMPILADO (secreto comercial)
# =========================
# Numeración F1..F27 sin F9: 26 factores.
TRADE_SECRET_FACTORS: Tuple[Factor, ...] = (
    Factor(1, "Disclosure-in-negotiations", Side.D),
    Factor(2, "Bribe-employee", Side.P),
    Factor(3, "Employee-sole-developer", Side.D),
    Factor(4, "Agreed-not-to-disclose", Side.P),
    Factor(5, "Agreement-not-specific", Side.D),
    Factor(6, "Security-measures", Side.P),
    Factor(7, "Brought-tools", Side.P),
    Factor(8, "Competitive-advantage", Side.P),
    Factor(10, "Secrets-disclosed-outsiders", Side.D),
    Factor(11, "Vertical-knowledge", Side.D),
    Factor(12, "Outsider-disclosures-restricted", Side.P),
    Factor(13, "Noncompetition-agreement", Side.P, provisional=True),
    Factor(14, "Restricted-materials-used", Side.P),
    Factor(15, "Unique-product", Side.P),
    Factor(16, "Info-reverse-engineerable", Side.D),
    Factor(17, "Info-independently-generated", Side.D),
    Factor(18, "Identical-products", Side.P),
    Factor(19, "No-security-measures", Side.D, provisional=True),
    Factor(20, "Info-known-to-competitors", Side.D),
    Factor(21, "Knew-info-confidential", Side.P, provisional=True),
    Factor(22, "Invasive-techniques", Side.P),
    Factor(23, "Waiver-of-confidentiality", Side.D),
    Factor(24, "Info-obtainable-elsewhere", Side.D),
    Factor(25, "Info-reverse-engineered", Side.D),
    Factor(26, "Deception", Side.P, provisional=True),
    Factor(27, "Disclosure-in-public-forum", Side.D),
)

CATALOG_SIZE = 26

# "F4", "F4 Agreed-not-to-disclose", "F4 Agreed-not-to-disclose (P)", "F4 (P)"
FACTOR_TOKEN_RE = re.compile(
    r"\bF(?P<id>\d+)\b"
    rf"(?:[ \t]+(?P<label>{FACTOR_LABEL_PATTERN}))?"
    r"(?:[ \t]*\((?P<side>[PD])\))?"
)


@dataclass(frozen=True)
class FactorCatalog:
    entries: Tuple[Factor, ...]
    source: str = "compiled"
    _index: Dict[int, Factor] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = [f.id for f in self.entries]
        if any(b <= a for a, b in zip(ids, ids[1:])):
            raise ValueError("los ids del catálogo deben ser estrictamente crecientes")
        object.__setattr__(self, "_index", {f.id: f for f in self.entries})

    @property
    def count(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> Tuple[int, ...]:
        return tuple(f.id for f in self.entries)

    def __iter__(self) -> Iterator[Factor]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, factor_id) -> bool:
        return factor_id in self._index

    def by_side(self, side: Side) -> Tuple[Factor, ...]:
        return tuple(f for f in self.entries if f.side == side)

    def lookup(self, factor_id: int) -> Factor:
        return lookup(self, factor_id)

    def digest(self) -> str:
        payload = "\n".join(f.render() for f in self.entries)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def to_jsonl(self) -> str:
        lines = []
        for f in self.entries:
            record = {"id": f.id, "label": f.label, "side": f.side.value}
            if f.provisional:
                record["provisional"] = True
            lines.append(json.dumps(record, separators=(",", ":")))
        return "\n".join(lines) + "\n"


# =========================
# FUNCIONES PÚBLICAS
# =========================
def load_catalog(path: Optional[str] = None) -> FactorCatalog:
    """
    Devuelve el catálogo canónico (26 factores) o, si se indica un archivo
    (argumento o settings.ARGLAB["FACTOR_CATALOG_PATH"]), el catálogo de ese archivo.
    """
    if path is None:
        path = settings.ARGLAB.get("FACTOR_CATALOG_PATH")
    if not path:
        return _compiled_catalog()
    return _catalog_from_file(str(Path(path).resolve()))


@lru_cache(maxsize=1)
def _compiled_catalog() -> FactorCatalog:
    catalog = FactorCatalog(TRADE_SECRET_FACTORS)
    assert catalog.count == CATALOG_SIZE
    return catalog


@lru_cache(maxsize=8)
def _catalog_from_file(path: str) -> FactorCatalog:
    entries = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_number, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CatalogFormatError(f"JSON inválido ({exc.msg})", line_number) from exc

            serializer = FactorRecordSerializer(data=data)
            if not serializer.is_valid():
                raise CatalogFormatError(f"registro inválido {dict(serializer.errors)}", line_number)
            record = serializer.validated_data
            if record["id"] in seen:
                raise CatalogFormatError(f"id duplicado F{record['id']}", line_number)
            if entries and record["id"] < entries[-1].id:
                raise CatalogFormatError("los ids deben estar en orden creciente", line_number)
            seen.add(record["id"])
            entries.append(
                Factor(record["id"], record["label"], Side(record["side"]), record["provisional"])
            )

    if not entries:
        raise CatalogFormatError("catálogo vacío", 0)
    logger.info("[CATALOG] %d factores cargados desde %s", len(entries), path)
    return FactorCatalog(tuple(entries), source=path)


def lookup(catalog: FactorCatalog, factor_id: int) -> Factor:
    try:
        return catalog._index[factor_id]
    except KeyError:
        raise UnknownFactorError(factor_id) from None


def find_factor_tokens(text: str) -> Iterator[re.Match]:
    """Todas las menciones tipo F<n> del texto, en orden de aparición."""
    return FACTOR_TOKEN_RE.finditer(text or "")


def parse_factor_token(catalog: FactorCatalog, text: str, strict: bool = True) -> Factor:
    """
    Resuelve el primer token de factor del texto por su id numérico.
    Si el token trae etiqueta o lado, se validan contra el catálogo: con strict=True
    una contradicción es FactorMismatchError; con strict=False se registra y se
    devuelve la entrada del catálogo.
    """
    match = FACTOR_TOKEN_RE.search(text or "")
    if match is None:
        raise FactorParseError(text)
    return resolve_token_match(catalog, match, strict=strict)


def resolve_token_match(catalog: FactorCatalog, match: re.Match, strict: bool = True) -> Factor:
    factor = lookup(catalog, int(match.group("id")))
    token = match.group(0)

    label = match.group("label")
    if label and label.lower() != factor.label.lower():
        if strict:
            raise FactorMismatchError(token, factor, "label")
        logger.warning("[CATALOG] etiqueta distinta en %r (catálogo: %s)", token, factor.render())

    side = match.group("side")
    if side and side != factor.side.value:
        if strict:
            raise FactorMismatchError(token, factor, "side")
        logger.warning("[CATALOG] lado distinto en %r (catálogo: %s)", token, factor.render())

    return factor
