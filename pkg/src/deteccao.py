# -*- coding: utf-8 -*-
"""
Fase 3 — Heurísticas comportamentais.

  • Varredura: fontes que tocam ``SCAN_THRESHOLD`` ou mais portas de destino
    distintas ao longo de toda a janela observada.
  • Backscatter: registros TCP cujas flags indicam resposta de vítima de DoS
    com origem forjada (SYN-ACK, RST-ACK, RST, ACK).
  • Impressões digitais de ferramentas (Zmap, Masscan, Mirai) tomadas como
    rótulos de entrada confiáveis.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from src.config import (
    BACKSCATTER_FLAGS, ECN_FLAGS, FINGERPRINT_TOOLS, SCAN_THRESHOLD,
)
from src.metricas import hour_bucket
from src.registro import ConnectionRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SourceProfile:
    source_ip: str
    ports: frozenset[int]
    total_packets: int
    total_records: int
    active_hours: frozenset[int]
    zmap: bool = False
    masscan: bool = False
    mirai: bool = False

    @property
    def distinct_ports(self) -> int:
        return len(self.ports)

    def merge(self, outro: "SourceProfile") -> "SourceProfile":
        if outro.source_ip != self.source_ip:
            raise ValueError(f"perfis de fontes diferentes: {self.source_ip} × {outro.source_ip}")
        return SourceProfile(
            source_ip=self.source_ip,
            ports=self.ports | outro.ports,
            total_packets=self.total_packets + outro.total_packets,
            total_records=self.total_records + outro.total_records,
            active_hours=self.active_hours | outro.active_hours,
            zmap=self.zmap or outro.zmap,
            masscan=self.masscan or outro.masscan,
            mirai=self.mirai or outro.mirai,
        )


@dataclass(frozen=True)
class FingerprintTally:
    records: int = 0
    packets: int = 0


@dataclass
class DetectionLabels:
    scanners: frozenset[str]
    backscatter_records: frozenset[int]
    fingerprint_counts: dict[str, FingerprintTally]
    scan_threshold_used: int
    backscatter_classified: int = 0
    backscatter_excluded: int = 0
    profiled_sources: int = 0
    scanner_packets: int = 0
    total_packets: int = 0

    def summary(self) -> dict:
        share = self.scanner_packets / self.total_packets if self.total_packets else 0.0
        return {
            "scan_threshold_used": self.scan_threshold_used,
            "profiled_sources": self.profiled_sources,
            "scanner_sources": len(self.scanners),
            "scanner_packets": self.scanner_packets,
            "scanner_packet_share": share,
            "backscatter_records": len(self.backscatter_records),
            "backscatter_classified": self.backscatter_classified,
            "backscatter_excluded": self.backscatter_excluded,
            "fingerprints": {
                t: {"records": c.records, "packets": c.packets}
                for t, c in sorted(self.fingerprint_counts.items())
            },
        }


# ── perfis por fonte ─────────────────────────────────────────────────────────

class _PerfilMutavel:
    __slots__ = ("ports", "packets", "records", "hours", "zmap", "masscan", "mirai")

    def __init__(self):
        self.ports: set[int] = set()
        self.hours: set[int] = set()
        self.packets = 0
        self.records = 0
        self.zmap = self.masscan = self.mirai = False


def build_profiles(records: Iterable[ConnectionRecord]) -> dict[str, SourceProfile]:
    """Um perfil por IP de origem, com portas e horas acumuladas na janela toda."""
    acc: dict[str, _PerfilMutavel] = {}
    for r in records:
        p = acc.get(r.source_ip)
        if p is None:
            p = acc[r.source_ip] = _PerfilMutavel()
        p.ports.add(r.port)
        p.hours.add(hour_bucket(r.first))
        p.packets += r.packets
        p.records += 1
        p.zmap |= r.zmap
        p.masscan |= r.masscan
        p.mirai |= r.mirai
    return {
        ip: SourceProfile(ip, frozenset(p.ports), p.packets, p.records,
                          frozenset(p.hours), p.zmap, p.masscan, p.mirai)
        for ip, p in sorted(acc.items())
    }


def merge_profiles(a: Mapping[str, SourceProfile],
                   b: Mapping[str, SourceProfile]) -> dict[str, SourceProfile]:
    """União de dois mapas parciais de perfis (comutativa e associativa)."""
    saida = dict(a)
    for ip, perfil in b.items():
        atual = saida.get(ip)
        saida[ip] = perfil if atual is None else atual.merge(perfil)
    return dict(sorted(saida.items()))


def detect_scanners(profiles: Mapping[str, SourceProfile],
                    threshold: int = SCAN_THRESHOLD) -> frozenset[str]:
    if threshold < 1:
        raise ValueError(f"limiar de varredura deve ser >= 1 (recebido {threshold})")
    return frozenset(ip for ip, p in profiles.items() if p.distinct_ports >= threshold)


# ── backscatter ──────────────────────────────────────────────────────────────

def normalize_flags(flags: str) -> frozenset[str]:
    """Conjunto de flags sem os bits ECN (variantes SAE/SAEC reduzem a SA)."""
    return frozenset(flags.upper()) - ECN_FLAGS


def is_backscatter_flags(flags: str,
                         table: Iterable[frozenset] = BACKSCATTER_FLAGS) -> bool:
    """Verdadeiro quando as flags, sem ECN, estão na tabela de backscatter."""
    return normalize_flags(flags) in frozenset(table)


def _classificar(records: Iterable[ConnectionRecord], offset: int,
                 table: frozenset) -> tuple[set[int], int, int]:
    indices: set[int] = set()
    classificados = excluidos = 0
    for i, r in enumerate(records, start=offset):
        if r.protocol != "tcp":
            continue
        if r.tcp_flags is None:
            excluidos += 1
            continue
        classificados += 1
        if is_backscatter_flags(r.tcp_flags, table):
            indices.add(i)
    return indices, classificados, excluidos


def detect_backscatter(records: Iterable[ConnectionRecord], offset: int = 0,
                       table: Iterable[frozenset] = BACKSCATTER_FLAGS) -> frozenset[int]:
    """
    Índices (a partir de ``offset``) dos registros classificados como
    backscatter. Registros TCP sem flags não são classificados; ICMP nunca é
    candidato.
    """
    indices, _, _ = _classificar(records, offset, frozenset(table))
    return frozenset(indices)


@dataclass
class BackscatterParcial:
    indices: set[int] = field(default_factory=set)
    classified: int = 0
    excluded: int = 0

    @classmethod
    def from_records(cls, records: Iterable[ConnectionRecord], offset: int = 0,
                     table: Iterable[frozenset] = BACKSCATTER_FLAGS) -> "BackscatterParcial":
        return cls(*_classificar(records, offset, frozenset(table)))

    def merge(self, outro: "BackscatterParcial") -> "BackscatterParcial":
        return BackscatterParcial(self.indices | outro.indices,
                                  self.classified + outro.classified,
                                  self.excluded + outro.excluded)


# ── impressões digitais ──────────────────────────────────────────────────────

def tally_fingerprints(records: Iterable[ConnectionRecord]) -> dict[str, FingerprintTally]:
    """Registros e pacotes por ferramenta; um registro pode contar em várias."""
    contagem = {t: [0, 0] for t in FINGERPRINT_TOOLS}
    for r in records:
        for t in FINGERPRINT_TOOLS:
            if getattr(r, t):
                contagem[t][0] += 1
                contagem[t][1] += r.packets
    return {t: FingerprintTally(*v) for t, v in contagem.items()}


def merge_fingerprints(a: Mapping[str, FingerprintTally],
                       b: Mapping[str, FingerprintTally]) -> dict[str, FingerprintTally]:
    return {
        t: FingerprintTally(a.get(t, FingerprintTally()).records + b.get(t, FingerprintTally()).records,
                            a.get(t, FingerprintTally()).packets + b.get(t, FingerprintTally()).packets)
        for t in sorted(set(a) | set(b))
    }


def label(profiles: Mapping[str, SourceProfile], backscatter: BackscatterParcial,
          fingerprints: Mapping[str, FingerprintTally],
          threshold: int = SCAN_THRESHOLD) -> DetectionLabels:
    """Consolida os rótulos de detecção a partir dos estados já agregados."""
    scanners = detect_scanners(profiles, threshold)
    total = sum(p.total_packets for p in profiles.values())
    pacotes_scanner = sum(profiles[ip].total_packets for ip in scanners)
    logger.info(f"  Scanners (>= {threshold} portas): {len(scanners)} de "
                f"{len(profiles)} fontes")
    logger.info(f"  Backscatter: {len(backscatter.indices)} registros "
                f"({backscatter.excluded} TCP sem flags excluídos)")
    return DetectionLabels(
        scanners=scanners,
        backscatter_records=frozenset(backscatter.indices),
        fingerprint_counts=dict(fingerprints),
        scan_threshold_used=threshold,
        backscatter_classified=backscatter.classified,
        backscatter_excluded=backscatter.excluded,
        profiled_sources=len(profiles),
        scanner_packets=pacotes_scanner,
        total_packets=total,
    )
