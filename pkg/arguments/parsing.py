"""
Parseo estricto de la salida de los pipelines.

Se toma el primer objeto JSON bien formado del texto (se toleran bloques ```json y prosa
alrededor). Un ply cuyo valor empieza por TERMINATE convierte todo el argumento en una
abstención en ese ply.
"""
import json
import logging
from typing import Dict, Optional, Union

from .exceptions import MalformedOutputError, MissingPlyError
from .plies import PLIES, TERMINATE, Abstention, Ply, ThreePlyArgument

logger = logging.getLogger(__name__)

_DECODER = json.JSONDecoder()


def extract_json_object(text: str) -> Optional[Dict]:
    """Primer objeto JSON decodificable del texto, o None."""
    text = text or ""
    start = text.find("{")
    while start != -1:
        try:
            obj, _ = _DECODER.raw_decode(text, start)
        except json.JSONDecodeError:
            obj = None
        if isinstance(obj, dict):
            return obj
        start = text.find("{", start + 1)
    return None


def _is_terminate(value) -> bool:
    return isinstance(value, str) and value.strip().startswith(TERMINATE)


def _reason(value: str) -> str:
    rest = value.strip()[len(TERMINATE):]
    return rest.lstrip(":").strip()


def parse_three_ply(text: str) -> ThreePlyArgument:
    raw = text or ""
    obj = extract_json_object(raw)
    if obj is None:
        if raw.strip().startswith(TERMINATE):
            return ThreePlyArgument.abstained_at(1, _reason(raw))
        raise MalformedOutputError("la salida no contiene un objeto JSON", raw)

    # La abstención se detecta antes que las claves ausentes
    for ply in PLIES:
        value = obj.get(ply.key)
        if _is_terminate(value):
            return ThreePlyArgument.abstained_at(ply.index, _reason(value))

    texts = []
    for ply in PLIES:
        value = obj.get(ply.key)
        if not isinstance(value, str) or not value.strip():
            raise MissingPlyError(ply, raw)
        texts.append(value)

    in_prose = any(TERMINATE in t for t in texts)
    if in_prose:
        logger.warning("[PARSE] un ply sustantivo menciona TERMINATE fuera del prefijo; se trata como argumento")
    return ThreePlyArgument.completed(*texts, terminate_in_prose=in_prose)


def parse_single_ply(text: str, ply: Ply) -> Union[str, Abstention]:
    """Salida de un solo ply (MA/RMA): {"<clave del ply>": "..."} o TERMINATE."""
    ply = Ply(ply)
    raw = text or ""
    obj = extract_json_object(raw)
    if obj is None:
        if raw.strip().startswith(TERMINATE):
            return Abstention(ply.index, _reason(raw))
        raise MalformedOutputError(f"la salida del ply {ply.index} no contiene un objeto JSON", raw)
    value = obj.get(ply.key)
    if _is_terminate(value):
        return Abstention(ply.index, _reason(value))
    if not isinstance(value, str) or not value.strip():
        raise MissingPlyError(ply, raw)
    return value


def serialize_three_ply(argument: ThreePlyArgument) -> str:
    if argument.abstained:
        ply = Ply(argument.abstention.ply_index)
        data = {ply.key: argument.abstention.render()}
    else:
        data = {ply.key: argument.ply_text(ply) for ply in PLIES}
    return json.dumps(data, ensure_ascii=False, indent=2)


def serialize_single_ply(ply: Ply, value: Union[str, Abstention]) -> str:
    ply = Ply(ply)
    text = value.render() if isinstance(value, Abstention) else value
    return json.dumps({ply.key: text}, ensure_ascii=False)
