"""
Generador paramétrico de tripletas (c1, c2, c3) y su clasificador.

El clasificador es el oráculo de verdad para la abstención: decide el modo de una
tripleta mirando solo sus factores y resultados, nunca los metadatos de generación.
"""
import hashlib
import logging
import random
from typing import List, Optional

from factors.catalog import FactorCatalog, Side, load_catalog

from .cases import SLOT_CASE_NAMES, Case, CaseSlot, CaseTriple, Outcome, ScenarioMode
from .exceptions import InfeasibleParametersError, UnclassifiableTripleError

logger = logging.getLogger(__name__)


def derive_seed(master_seed: int, index: int) -> int:
    """seed_i = primeros 8 bytes (big-endian) de sha256("<master_seed>:<index>")."""
    digest = hashlib.sha256(f"{master_seed}:{index}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _check_feasible(mode: ScenarioMode, complexity: int, catalog: FactorCatalog) -> None:
    if complexity < 2:
        raise InfeasibleParametersError(f"complexity debe ser >= 2 (recibido {complexity})")
    largest = complexity + 1
    if mode == ScenarioMode.NON_ARGUABLE:
        # c1 y cada precedente deben caber disjuntos
        needed = 2 * largest
    else:
        # c1 completo + los factores distintivos del precedente más grande
        needed = largest + (largest - 1)
        if not catalog.by_side(Side.P) or not catalog.by_side(Side.D):
            raise InfeasibleParametersError("el catálogo necesita factores de ambos lados")
    if needed > catalog.count:
        raise InfeasibleParametersError(
            f"complexity={complexity} requiere {needed} factores para {mode.value}; "
            f"el catálogo tiene {catalog.count}"
        )


def _build(triple_id, mode, seed, complexity, c1_ids, c2_ids, c3_ids, c2_outcome, c3_outcome):
    return CaseTriple(
        id=triple_id,
        c1=Case(SLOT_CASE_NAMES[CaseSlot.C1], None, tuple(c1_ids)),
        c2=Case(SLOT_CASE_NAMES[CaseSlot.C2], c2_outcome, tuple(c2_ids)),
        c3=Case(SLOT_CASE_NAMES[CaseSlot.C3], c3_outcome, tuple(c3_ids)),
        mode=mode,
        seed=seed,
        complexity=complexity,
    )


def _sample_overlapping(rng: random.Random, complexity: int, catalog: FactorCatalog):
    """Estructura compartida por Arguable y Mismatched."""
    low, high = max(2, complexity - 1), complexity + 1
    n1, n2, n3 = [rng.randint(low, high) for _ in range(3)]

    # Compartidos con c2 en [1, min-1]; con c3 además limitado por lo que queda de c1
    s2 = rng.randint(1, min(n1, n2) - 1)
    s3 = rng.randint(1, min(n1 - s2, n3 - 1))

    p_anchor = rng.choice([f.id for f in catalog.by_side(Side.P)])
    d_anchor = rng.choice([f.id for f in catalog.by_side(Side.D)])
    pool = [i for i in catalog.ids if i not in (p_anchor, d_anchor)]
    extra = rng.sample(pool, n1 - 2)

    shared_c2 = [p_anchor] + extra[: s2 - 1]
    shared_c3 = [d_anchor] + extra[s2 - 1: s2 - 1 + s3 - 1]
    c1 = [p_anchor, d_anchor] + extra

    outside = [i for i in catalog.ids if i not in set(c1)]
    c2 = shared_c2 + rng.sample(outside, n2 - s2)
    c3 = shared_c3 + rng.sample(outside, n3 - s3)
    return c1, c2, c3


def _sample_disjoint(rng: random.Random, complexity: int, catalog: FactorCatalog):
    low, high = complexity - 1, complexity + 1
    n1, n2, n3 = [rng.randint(low, high) for _ in range(3)]
    c1 = rng.sample(list(catalog.ids), n1)
    outside = [i for i in catalog.ids if i not in set(c1)]
    # c2 y c3 pueden compartir factores entre sí
    return c1, rng.sample(outside, n2), rng.sample(outside, n3)


# =========================
# FUNCIONES PÚBLICAS
# =========================
def generate_triple(
    mode: ScenarioMode,
    complexity: int,
    seed: int,
    catalog: Optional[FactorCatalog] = None,
    triple_id: Optional[str] = None,
) -> CaseTriple:
    """Función pura de (mode, complexity, seed, catalog)."""
    mode = ScenarioMode(mode)
    catalog = catalog or load_catalog()
    _check_feasible(mode, complexity, catalog)
    rng = random.Random(seed)
    triple_id = triple_id or f"{mode.value.lower()}-s{seed}"

    if mode == ScenarioMode.NON_ARGUABLE:
        c1, c2, c3 = _sample_disjoint(rng, complexity, catalog)
        return _build(triple_id, mode, seed, complexity, c1, c2, c3, Outcome.PLAINTIFF, Outcome.DEFENDANT)

    c1, c2, c3 = _sample_overlapping(rng, complexity, catalog)
    if mode == ScenarioMode.MISMATCHED:
        # Misma estructura que Arguable; solo se invierten los resultados
        return _build(triple_id, mode, seed, complexity, c1, c2, c3, Outcome.DEFENDANT, Outcome.PLAINTIFF)
    return _build(triple_id, mode, seed, complexity, c1, c2, c3, Outcome.PLAINTIFF, Outcome.DEFENDANT)


def generate_set(
    mode: ScenarioMode,
    complexity: int,
    count: int,
    master_seed: int,
    catalog: Optional[FactorCatalog] = None,
) -> List[CaseTriple]:
    if count < 1:
        raise InfeasibleParametersError(f"count debe ser >= 1 (recibido {count})")
    mode = ScenarioMode(mode)
    catalog = catalog or load_catalog()
    triples = [
        generate_triple(
            mode,
            complexity,
            derive_seed(master_seed, index),
            catalog,
            triple_id=f"{mode.value.lower()}-{index + 1:04d}",
        )
        for index in range(count)
    ]
    logger.info("[GEN] %d tripletas %s (complexity=%d, master_seed=%s)", count, mode.value, complexity, master_seed)
    return triples


def classify_triple(triple: CaseTriple, catalog: Optional[FactorCatalog] = None) -> ScenarioMode:
    """
    Orden de prueba: NonArguable -> Mismatched -> Arguable.
    Una tripleta que no cumple ningún contrato es UnclassifiableTripleError.
    """
    catalog = catalog or load_catalog()
    triple.validate(catalog)

    shared_c2 = triple.c1.factor_set & triple.c2.factor_set
    shared_c3 = triple.c1.factor_set & triple.c3.factor_set

    if not shared_c2 and not shared_c3:
        return ScenarioMode.NON_ARGUABLE
    if not shared_c2 or not shared_c3:
        raise UnclassifiableTripleError(triple.id, "solo uno de los precedentes comparte factores con c1")

    plaintiff_usable = any(catalog.lookup(i).side == Side.P for i in shared_c2)
    defendant_usable = any(catalog.lookup(i).side == Side.D for i in shared_c3)
    if not (plaintiff_usable and defendant_usable):
        raise UnclassifiableTripleError(
            triple.id, "los factores compartidos no favorecen al lado de cada precedente"
        )

    if triple.c2.outcome != Outcome.PLAINTIFF or triple.c3.outcome != Outcome.DEFENDANT:
        return ScenarioMode.MISMATCHED
    return ScenarioMode.ARGUABLE
