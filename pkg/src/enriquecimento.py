# -*- coding: utf-8 -*-
"""
Fase 2 — Enriquecimento geográfico e de rede.

Mapeia IPs de origem para (país, ASN, organização) a partir de um snapshot
offline de prefixos, com casamento pelo prefixo mais longo. Nenhum serviço
online é consultado.

Formato do snapshot (CSV UTF-8)::

    # snapshot-date: 2025-01-09
    Prefix,Country,ASN,Org
    10.0.0.0/8,US,64500,ExampleOrg

Linhas iniciadas por ``#`` são comentários.
"""

import csv
import enum
import logging
from dataclasses import dataclass, field, replace
from ipaddress import IPv4Address, IPv4Network
from pathlib import Path
from typing import Iterable, NamedTuple

from src.config import CSV_ENCODING, UNKNOWN_ASN, UNKNOWN_COUNTRY, UNKNOWN_ORG
from src.erros import DuplicatePrefixError, InputIOError, MalformedCidrError
from src.registro import ConnectionRecord

logger = logging.getLogger(__name__)

SNAPSHOT_HEADER = ("Prefix", "Country", "ASN", "Org")


class GeoInfo(NamedTuple):
    country: str
    asn: int
    org: str


UNKNOWN = GeoInfo(UNKNOWN_COUNTRY, UNKNOWN_ASN, UNKNOWN_ORG)


class EnrichPolicy(str, enum.Enum):
    FILL_MISSING = "fill"
    OVERRIDE     = "override"


@dataclass(frozen=True)
class SnapshotEntry:
    network: IPv4Network
    country: str
    asn: int
    org: str

    @property
    def info(self) -> GeoInfo:
        return GeoInfo(self.country, self.asn, self.org)


@dataclass(frozen=True)
class EnrichmentSnapshot:
    """Tabela imutável prefixo → (país, ASN, org) indexada por comprimento."""
    entries: tuple[SnapshotEntry, ...] = ()
    snapshot_date: str = ""
    # {comprimento: {endereço_de_rede_int: entrada}}
    _indice: dict = field(default_factory=dict, repr=False, compare=False)
    _comprimentos: tuple[int, ...] = field(default=(), repr=False, compare=False)

    @classmethod
    def build(cls, entries: Iterable[SnapshotEntry],
              snapshot_date: str = "") -> "EnrichmentSnapshot":
        entries = tuple(entries)
        indice: dict[int, dict[int, SnapshotEntry]] = {}
        for e in entries:
            porlen = indice.setdefault(e.network.prefixlen, {})
            chave = int(e.network.network_address)
            if chave in porlen:
                raise DuplicatePrefixError(f"prefixo duplicado: {e.network}")
            porlen[chave] = e
        comprimentos = tuple(sorted(indice, reverse=True))
        return cls(entries=entries, snapshot_date=snapshot_date,
                   _indice=indice, _comprimentos=comprimentos)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class EnrichmentTally:
    filled: int = 0
    overridden: int = 0
    unknown: int = 0

    def merge(self, outro: "EnrichmentTally") -> "EnrichmentTally":
        return EnrichmentTally(self.filled + outro.filled,
                               self.overridden + outro.overridden,
                               self.unknown + outro.unknown)

    def to_dict(self) -> dict:
        return {"filled": self.filled, "overridden": self.overridden,
                "unknown": self.unknown}


# ── carga ────────────────────────────────────────────────────────────────────

def _entrada(row: dict, linha: int, path) -> SnapshotEntry:
    bruto = (row.get("Prefix") or "").strip()
    try:
        rede = IPv4Network(bruto, strict=True)
    except ValueError as exc:
        raise MalformedCidrError(f"{path}:{linha}: CIDR inválido {bruto!r}: {exc}")
    try:
        asn = int((row.get("ASN") or "0").strip().upper().removeprefix("AS") or 0)
    except ValueError:
        raise MalformedCidrError(f"{path}:{linha}: ASN inválido {row.get('ASN')!r}")
    pais = (row.get("Country") or "").strip().upper() or UNKNOWN_COUNTRY
    return SnapshotEntry(rede, pais, asn, (row.get("Org") or "").strip())


def load_snapshot(path) -> EnrichmentSnapshot:
    """Carrega o snapshot e monta o índice de casamento por prefixo mais longo."""
    path = Path(path)
    data = ""
    linhas_dados: list[tuple[int, str]] = []
    try:
        with open(path, "r", encoding=CSV_ENCODING, newline="") as fh:
            for n, linha in enumerate(fh, start=1):
                s = linha.strip()
                if not s:
                    continue
                if s.startswith("#"):
                    chave, _, valor = s.lstrip("#").partition(":")
                    if chave.strip().lower() in ("snapshot-date", "snapshot_date"):
                        data = valor.strip()
                    continue
                linhas_dados.append((n, linha))
    except OSError as exc:
        raise InputIOError(path, exc)

    if not linhas_dados:
        return EnrichmentSnapshot.build((), data)
    numeros = [n for n, _ in linhas_dados]
    reader = csv.DictReader(l for _, l in linhas_dados)
    faltando = [c for c in SNAPSHOT_HEADER if c not in (reader.fieldnames or [])]
    if faltando:
        raise MalformedCidrError(
            f"{path}: cabeçalho do snapshot sem coluna(s) {', '.join(faltando)}")
    entradas = [_entrada(row, numeros[i + 1], path) for i, row in enumerate(reader)]
    snap = EnrichmentSnapshot.build(entradas, data)
    logger.info(f"Snapshot {path.name}: {len(snap)} prefixos (data: {data or '?'})")
    return snap


def write_snapshot(snapshot: EnrichmentSnapshot, path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding=CSV_ENCODING, newline="") as fh:
            if snapshot.snapshot_date:
                fh.write(f"# snapshot-date: {snapshot.snapshot_date}\n")
            w = csv.writer(fh)
            w.writerow(SNAPSHOT_HEADER)
            for e in sorted(snapshot.entries,
                            key=lambda e: (int(e.network.network_address),
                                           e.network.prefixlen)):
                w.writerow([str(e.network), e.country, e.asn, e.org])
    except OSError as exc:
        raise InputIOError(path, exc)
    return path


# ── consulta ─────────────────────────────────────────────────────────────────

def lookup(snapshot: EnrichmentSnapshot, ip) -> GeoInfo:
    """Entrada do prefixo mais longo que contém ``ip``; ``UNKNOWN`` se nenhum."""
    n = int(IPv4Address(ip))
    for comprimento in snapshot._comprimentos:
        mascara = (0xFFFFFFFF << (32 - comprimento)) & 0xFFFFFFFF
        e = snapshot._indice[comprimento].get(n & mascara)
        if e is not None:
            return e.info
    return UNKNOWN


def enrich_records(records: Iterable[ConnectionRecord],
                   snapshot: EnrichmentSnapshot,
                   policy: EnrichPolicy | str = EnrichPolicy.FILL_MISSING,
                   ) -> tuple[list[ConnectionRecord], EnrichmentTally]:
    """
    Preenche país/ASN/org a partir do snapshot.

    ``fill``: só campos ausentes (marcadores de desconhecido) são preenchidos.
    ``override``: um acerto no snapshot prevalece sobre o valor embutido.
    """
    policy = EnrichPolicy(policy)
    saida: list[ConnectionRecord] = []
    tally = EnrichmentTally()
    cache: dict[str, GeoInfo] = {}
    for r in records:
        geo = cache.get(r.source_ip)
        if geo is None:
            geo = cache[r.source_ip] = lookup(snapshot, r.source_ip)
        novo = r
        if geo is not UNKNOWN:
            if policy is EnrichPolicy.OVERRIDE:
                mudancas = {k: v for k, v in geo._asdict().items()
                            if getattr(r, k) != v}
                if mudancas:
                    novo = replace(r, **mudancas)
                    tally.overridden += 1
            else:
                mudancas = {}
                if r.country == UNKNOWN_COUNTRY:
                    mudancas["country"] = geo.country
                if r.asn == UNKNOWN_ASN:
                    mudancas["asn"] = geo.asn
                if r.org == UNKNOWN_ORG:
                    mudancas["org"] = geo.org
                mudancas = {k: v for k, v in mudancas.items() if getattr(r, k) != v}
                if mudancas:
                    novo = replace(r, **mudancas)
                    tally.filled += 1
        if novo.country == UNKNOWN_COUNTRY and novo.asn == UNKNOWN_ASN:
            tally.unknown += 1
        saida.append(novo)
    return saida, tally
