# -*- coding: utf-8 -*-
"""
Modelo de dados dos registros de conexão do telescópio.

Cada linha do export agregado vira um ``ConnectionRecord`` imutável. A
validação é total: toda linha bruta resulta em exatamente um registro aceito
ou em um único motivo de rejeição (``RejectReason``); campos críticos nunca
são "consertados" silenciosamente.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from datetime import timezone
from ipaddress import IPv4Address, IPv4Network
from typing import Iterable, Mapping

from dateutil.parser import isoparse

from src.config import (
    BOOL_FALSE, BOOL_TRUE, CRITICAL_COLUMNS, ECN_FLAGS, NULL_MARKERS,
    TCP_FLAG_ALPHABET, UNKNOWN_ASN, UNKNOWN_COUNTRY, UNKNOWN_ORG,
)

logger = logging.getLogger(__name__)

# chave reservada: linha CSV estruturalmente inválida
MALFORMED_KEY = "__malformed__"
# token que representa um conjunto de flags TCP presente porém vazio
EMPTY_FLAGS_TOKEN = "-"


class RejectReason(str, enum.Enum):
    NULL_CRITICAL_FIELD = "null_critical_field"
    ZERO_PACKETS        = "zero_packets"
    INVALID_PORT        = "invalid_port"
    MALFORMED_FIELD     = "malformed_field"


class TimestampFormat(str, enum.Enum):
    EPOCH = "epoch"
    ISO   = "iso"


@dataclass(frozen=True, slots=True)
class ConnectionRecord:
    """Resumo agregado de um fluxo observado pelo telescópio."""
    source_ip: str
    port: int
    packets: int
    first: int = 0
    last: int = 0
    traffic: str = ""
    bytes: int = 0
    unique_dests: int = 0
    unique_dest24s: int = 0
    lat: float | None = None
    long: float | None = None
    country: str = UNKNOWN_COUNTRY
    city: str | None = None
    asn: int = UNKNOWN_ASN
    org: str = UNKNOWN_ORG
    prefix: str | None = None
    rdns: str | None = None
    zmap: bool = False
    masscan: bool = False
    mirai: bool = False
    samples: int = 0
    tcp: bool = False
    icmp: bool = False
    tcp_flags: str | None = None

    @property
    def protocol(self) -> str:
        # tcp vence quando as duas flags estão ligadas
        if self.tcp:
            return "tcp"
        if self.icmp:
            return "icmp"
        return self.traffic.strip().lower() or "other"


@dataclass(frozen=True, slots=True)
class DatasetSummary:
    record_count: int = 0
    total_packets: int = 0
    unique_source_ips: int = 0
    unique_ports: int = 0
    unique_asns: int = 0
    time_span: tuple[int, int] | None = None


# ── parsing de campos ────────────────────────────────────────────────────────

def _nulo(valor) -> bool:
    return valor is None or str(valor).strip() in NULL_MARKERS


def _inteiro(valor, padrao: int = 0, minimo: int | None = 0) -> int:
    if _nulo(valor):
        return padrao
    n = int(str(valor).strip())
    if minimo is not None and n < minimo:
        raise ValueError(f"valor negativo: {valor!r}")
    return n


def _real(valor, limite: float) -> float | None:
    if _nulo(valor):
        return None
    x = float(str(valor).strip())
    if not math.isfinite(x) or abs(x) > limite:
        raise ValueError(f"coordenada fora do intervalo: {valor!r}")
    return x


def _booleano(valor) -> bool:
    if _nulo(valor):
        return False
    v = str(valor).strip()
    if v in BOOL_TRUE:
        return True
    if v in BOOL_FALSE:
        return False
    raise ValueError(f"booleano inválido: {valor!r}")


def _texto(valor) -> str | None:
    if _nulo(valor):
        return None
    return str(valor).strip()


def _asn(valor) -> int:
    if _nulo(valor):
        return UNKNOWN_ASN
    v = str(valor).strip()
    if v[:2].upper() == "AS":
        v = v[2:]
    return _inteiro(v)


def _pais(valor) -> str:
    if _nulo(valor):
        return UNKNOWN_COUNTRY
    v = str(valor).strip().upper()
    if v != UNKNOWN_COUNTRY and (len(v) != 2 or not v.isalpha()):
        raise ValueError(f"código de país inválido: {valor!r}")
    return v


def _prefixo(valor) -> str | None:
    if _nulo(valor):
        return None
    return str(IPv4Network(str(valor).strip(), strict=False))


def _flags_tcp(valor) -> str | None:
    if valor is None:
        return None
    v = str(valor).strip().upper()
    if v == EMPTY_FLAGS_TOKEN:
        return ""
    if v in NULL_MARKERS:
        return None
    if set(v) - TCP_FLAG_ALPHABET - ECN_FLAGS:
        # registro mantido; flags desconhecidas ficam fora da classificação
        logger.debug(f"Flags TCP não classificáveis: {valor!r}")
        return None
    return v


def detect_timestamp_format(valor) -> TimestampFormat | None:
    """Decide se um carimbo de tempo está em segundos epoch ou ISO-8601."""
    if _nulo(valor):
        return None
    v = str(valor).strip()
    try:
        float(v)
        return TimestampFormat.EPOCH
    except ValueError:
        return TimestampFormat.ISO


def parse_timestamp(valor, formato: TimestampFormat | None = None) -> int | None:
    """Converte para segundos epoch UTC (inteiro, truncado)."""
    if _nulo(valor):
        return None
    v = str(valor).strip()
    detectado = detect_timestamp_format(v)
    if formato is not None and detectado is not TimestampFormat(formato):
        raise ValueError(f"carimbo fora do formato do arquivo ({formato.value}): {v!r}")
    if detectado is TimestampFormat.EPOCH:
        x = float(v)
        if not math.isfinite(x) or x < 0:
            raise ValueError(f"epoch inválido: {v!r}")
        return int(math.floor(x))
    dt = isoparse(v)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    x = dt.timestamp()
    if x < 0:
        raise ValueError(f"carimbo anterior a 1970: {v!r}")
    return int(math.floor(x))


# ── validação ────────────────────────────────────────────────────────────────

def validate_record(raw: Mapping[str, str | None],
                    timestamp_format: TimestampFormat | None = None,
                    ) -> ConnectionRecord | RejectReason:
    """
    Valida um mapa bruto (nomes de coluna do export) e devolve o registro ou
    o motivo de rejeição.

    Ordem de verificação: linha malformada, campo crítico nulo, campo que não
    converte, porta fora de 1..65535, zero pacotes.
    """
    if raw.get(MALFORMED_KEY):
        return RejectReason.MALFORMED_FIELD
    if any(_nulo(raw.get(c)) for c in CRITICAL_COLUMNS):
        return RejectReason.NULL_CRITICAL_FIELD

    try:
        source_ip = str(IPv4Address(str(raw["SourceIP"]).strip()))
        port = int(str(raw["Port"]).strip())
        packets = _inteiro(raw["Packets"])
        first = parse_timestamp(raw.get("First"), timestamp_format)
        last = parse_timestamp(raw.get("Last"), timestamp_format)
        first = 0 if first is None else first
        last = first if last is None else last
        if first > last:
            raise ValueError("First posterior a Last")
        unique_dests = _inteiro(raw.get("UniqueDests"))
        unique_dest24s = _inteiro(raw.get("UniqueDest24s"))
        if unique_dest24s > unique_dests:
            raise ValueError("UniqueDest24s maior que UniqueDests")
        campos = dict(
            traffic=_texto(raw.get("Traffic")) or "",
            bytes=_inteiro(raw.get("Bytes")),
            lat=_real(raw.get("Lat"), 90.0),
            long=_real(raw.get("Long"), 180.0),
            country=_pais(raw.get("Country")),
            city=_texto(raw.get("City")),
            asn=_asn(raw.get("ASN")),
            org=_texto(raw.get("Org")) or UNKNOWN_ORG,
            prefix=_prefixo(raw.get("Prefix")),
            rdns=_texto(raw.get("RDNS")),
            zmap=_booleano(raw.get("Zmap")),
            masscan=_booleano(raw.get("Masscan")),
            mirai=_booleano(raw.get("Mirai")),
            samples=_inteiro(raw.get("Samples")),
            tcp=_booleano(raw.get("TCP")),
            icmp=_booleano(raw.get("ICMP")),
            tcp_flags=_flags_tcp(raw.get("TcpFlags")),
        )
    except (ValueError, TypeError, OverflowError) as exc:
        logger.debug(f"Campo malformado: {exc}")
        return RejectReason.MALFORMED_FIELD

    if not 1 <= port <= 65535:
        return RejectReason.INVALID_PORT
    if packets == 0:
        return RejectReason.ZERO_PACKETS

    return ConnectionRecord(
        source_ip=source_ip, port=port, packets=packets,
        first=first, last=last,
        unique_dests=unique_dests, unique_dest24s=unique_dest24s,
        **campos,
    )


def _fmt(valor) -> str:
    if valor is None:
        return ""
    if isinstance(valor, bool):
        return "1" if valor else "0"
    if isinstance(valor, float):
        return repr(valor)
    return str(valor)


def record_to_row(rec: ConnectionRecord) -> dict[str, str]:
    """Serializa um registro com os nomes de coluna do export."""
    flags = rec.tcp_flags
    if flags == "":
        flags = EMPTY_FLAGS_TOKEN
    return {
        "SourceIP": rec.source_ip,
        "Port": _fmt(rec.port),
        "Traffic": rec.traffic,
        "First": _fmt(rec.first),
        "Last": _fmt(rec.last),
        "Packets": _fmt(rec.packets),
        "Bytes": _fmt(rec.bytes),
        "UniqueDests": _fmt(rec.unique_dests),
        "UniqueDest24s": _fmt(rec.unique_dest24s),
        "Lat": _fmt(rec.lat),
        "Long": _fmt(rec.long),
        "Country": rec.country,
        "City": _fmt(rec.city),
        "ASN": _fmt(rec.asn),
        "Org": rec.org,
        "Prefix": _fmt(rec.prefix),
        "RDNS": _fmt(rec.rdns),
        "Zmap": _fmt(rec.zmap),
        "Masscan": _fmt(rec.masscan),
        "Mirai": _fmt(rec.mirai),
        "Samples": _fmt(rec.samples),
        "TCP": _fmt(rec.tcp),
        "ICMP": _fmt(rec.icmp),
        "TcpFlags": _fmt(flags),
    }


# ── resumo do conjunto ───────────────────────────────────────────────────────

class ResumoParcial:
    """Estado parcial de ``summarize``; ``merge`` é comutativo e associativo."""

    def __init__(self):
        self.record_count = 0
        self.total_packets = 0
        self.fontes: set[str] = set()
        self.portas: set[int] = set()
        self.asns: set[int] = set()
        self.inicio: int | None = None
        self.fim: int | None = None

    def add(self, records: Iterable[ConnectionRecord]) -> "ResumoParcial":
        for r in records:
            self.record_count += 1
            self.total_packets += r.packets
            self.fontes.add(r.source_ip)
            self.portas.add(r.port)
            self.asns.add(r.asn)
            self.inicio = r.first if self.inicio is None else min(self.inicio, r.first)
            self.fim = r.last if self.fim is None else max(self.fim, r.last)
        return self

    def merge(self, outro: "ResumoParcial") -> "ResumoParcial":
        novo = ResumoParcial()
        novo.record_count = self.record_count + outro.record_count
        novo.total_packets = self.total_packets + outro.total_packets
        novo.fontes = self.fontes | outro.fontes
        novo.portas = self.portas | outro.portas
        novo.asns = self.asns | outro.asns
        inicios = [x for x in (self.inicio, outro.inicio) if x is not None]
        fins = [x for x in (self.fim, outro.fim) if x is not None]
        novo.inicio = min(inicios) if inicios else None
        novo.fim = max(fins) if fins else None
        return novo

    def finalize(self) -> DatasetSummary:
        if self.record_count == 0:
            return DatasetSummary()
        return DatasetSummary(
            record_count=self.record_count,
            total_packets=self.total_packets,
            unique_source_ips=len(self.fontes),
            unique_ports=len(self.portas),
            unique_asns=len(self.asns),
            time_span=(self.inicio, self.fim),
        )


def summarize(records: Iterable[ConnectionRecord]) -> DatasetSummary:
    """Contagens exatas do conjunto limpo; independe da ordem de entrada."""
    return ResumoParcial().add(records).finalize()
