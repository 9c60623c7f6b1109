# -*- coding: utf-8 -*-
"""
Fase 0 — Corpus sintético com gabarito.

Gera registros no mesmo formato CSV consumido pela ingestão, a partir de
campanhas declaradas num arquivo JSON, e grava ao lado o gabarito (scanners,
registros de backscatter, classe pretendida por ASN, volume por fonte).

Campanhas:
  • persistent_scanner  ativa em (quase) todas as horas, poucas portas fixas
  • bursty_spike        todo o volume numa única hora
  • coordinated_surge   muitas fontes, cada uma num ASN, muitas portas, hora final
  • backscatter_victim  respostas SYN-ACK / RST-ACK em portas altas
  • background_noise    volumes de cauda pesada (Pareto truncada), portas populares

Gerador: numpy PCG64 semeado com ``seed``. Ordem de consumo fixa: campanhas na
ordem do arquivo (fontes e linhas fixas, volumes do fundo), calibração
(determinística), linhas do fundo, deslocamentos de tempo dentro da hora.
"""

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from ipaddress import IPv4Address, IPv4Network
from pathlib import Path
from typing import Iterable

import numpy as np
from tqdm import tqdm

from src.config import (
    BACKGROUND_COUNTRIES, BACKGROUND_PORTS, CAMPAIGN_KINDS, CSV_ENCODING,
    DEFAULT_SCHEMA, FINGERPRINT_TOOLS, SCAN_THRESHOLD, SECONDS_PER_HOUR,
    SYNTH_ALGORITHM, SYNTH_ASN_BASE, SYNTH_ASN_CLASS, SYNTH_BACKGROUND_ASNS,
    SYNTH_BACKSCATTER_FLAGS, SYNTH_BYTES_PER_PACKET, SYNTH_CORPUS_NAME,
    SYNTH_DEST24S, SYNTH_DESTS, SYNTH_MAX_ASNS, SYNTH_NETWORK_BASE,
    SYNTH_PARETO_ALPHA, SYNTH_PROBE_FLAGS, SYNTH_SHARE_TOLERANCE,
    SYNTH_SNAPSHOT_NAME, SYNTH_START_EPOCH, SYNTH_TRUTH_NAME,
    SYNTH_VOLUME_MAX, SYNTH_VOLUME_MIN, SYNTH_WINDOW_HOURS,
)
from src.deteccao import DetectionLabels
from src.enriquecimento import EnrichmentSnapshot, SnapshotEntry, write_snapshot
from src.erros import ConfigError, InputIOError, InvalidConfigError
from src.ingestao import file_digest
from src.metricas import BurstinessClass
from src.registro import (
    ConnectionRecord, RejectReason, TimestampFormat, record_to_row,
    validate_record,
)

logger = logging.getLogger(__name__)

# código de flag por linha: 0 sonda, 1.. respostas de vítima
_FLAGS = (SYNTH_PROBE_FLAGS,) + tuple(SYNTH_BACKSCATTER_FLAGS)
_PORTA_ALTA = 1024


# ==============================================================================
# CONFIGURAÇÃO
# ==============================================================================

@dataclass(frozen=True)
class CampaignSpec:
    kind: str
    sources: int
    ports: tuple[int, ...] = ()
    port_diversity: int = 0
    packets_per_hour: int = 0
    active_fraction: float = 1.0
    spike_hour: int | None = None
    spike_packets: int = 0
    packets_per_record: int = 1
    records_per_source: int = 3
    asn: int | None = None
    asn_count: int | None = None
    country: str | None = None
    org: str | None = None
    tool: str | None = None
    pareto_alpha: float = SYNTH_PARETO_ALPHA
    volume_min: int = SYNTH_VOLUME_MIN
    volume_max: int = SYNTH_VOLUME_MAX

    @property
    def n_asns(self) -> int:
        if self.kind == "coordinated_surge":
            return self.sources
        if self.asn is not None:
            return 1
        if self.asn_count is not None:
            return self.asn_count
        return SYNTH_BACKGROUND_ASNS if self.kind == "background_noise" else 1

    @property
    def n_ports(self) -> int:
        return len(self.ports) or self.port_diversity

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignSpec":
        if not isinstance(d, dict):
            raise InvalidConfigError(f"campanha deve ser um objeto JSON: {d!r}")
        extras = set(d) - {f.name for f in fields(cls)}
        if extras:
            raise InvalidConfigError(f"campo(s) desconhecido(s) na campanha: {sorted(extras)}")
        kw = dict(d)
        if "ports" in kw:
            kw["ports"] = tuple(int(p) for p in kw["ports"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise InvalidConfigError(f"campanha inválida: {exc}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ports"] = list(self.ports)
        return d


def _exigir(condicao: bool, mensagem: str) -> None:
    if not condicao:
        raise InvalidConfigError(mensagem)


def _validar_campanha(i: int, c: CampaignSpec, horas: int) -> None:
    onde = f"campanha {i} ({c.kind})"
    _exigir(c.kind in CAMPAIGN_KINDS, f"{onde}: tipo desconhecido")
    _exigir(isinstance(c.sources, int) and c.sources >= 1, f"{onde}: sources deve ser >= 1")
    _exigir(all(1 <= p <= 65535 for p in c.ports), f"{onde}: porta fora de 1..65535")
    _exigir(len(set(c.ports)) == len(c.ports), f"{onde}: portas repetidas")
    _exigir(0 <= c.port_diversity <= 65535, f"{onde}: port_diversity fora de 0..65535")
    _exigir(c.tool is None or c.tool in FINGERPRINT_TOOLS, f"{onde}: ferramenta desconhecida {c.tool!r}")
    _exigir(c.country is None or (len(c.country) == 2 and c.country.isalpha()),
            f"{onde}: país deve ser ISO-3166 alfa-2")
    _exigir(c.asn is None or c.asn >= 1, f"{onde}: ASN deve ser >= 1")
    _exigir(c.asn is None or c.asn_count in (None, 1), f"{onde}: asn explícito com asn_count > 1")
    _exigir(c.asn_count is None or c.asn_count >= 1, f"{onde}: asn_count deve ser >= 1")

    if c.kind in ("persistent_scanner", "bursty_spike", "coordinated_surge"):
        _exigir(c.n_ports >= 1, f"{onde}: informe ports ou port_diversity")
    if c.kind == "persistent_scanner":
        _exigir(0 < c.active_fraction <= 1, f"{onde}: active_fraction fora de (0, 1]")
        _exigir(c.packets_per_hour >= c.n_ports,
                f"{onde}: packets_per_hour deve cobrir ao menos 1 pacote por porta")
    if c.kind in ("bursty_spike", "coordinated_surge"):
        if c.kind == "bursty_spike":
            _exigir(c.spike_hour is not None, f"{onde}: spike_hour obrigatório")
        if c.spike_hour is not None:
            _exigir(0 <= c.spike_hour < horas, f"{onde}: spike_hour fora da janela 0..{horas - 1}")
        _exigir(c.spike_packets >= c.n_ports,
                f"{onde}: spike_packets deve cobrir ao menos 1 pacote por porta")
    if c.kind == "backscatter_victim":
        _exigir(1 <= c.records_per_source <= 65535 - _PORTA_ALTA + 1,
                f"{onde}: records_per_source inválido")
        _exigir(c.packets_per_record >= 1, f"{onde}: packets_per_record deve ser >= 1")
    if c.kind == "background_noise":
        _exigir(c.records_per_source >= 1, f"{onde}: records_per_source deve ser >= 1")
        _exigir(c.pareto_alpha > 0, f"{onde}: pareto_alpha deve ser > 0")
        _exigir(1 <= c.volume_min <= c.volume_max, f"{onde}: exige 1 <= volume_min <= volume_max")


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    campaigns: tuple[CampaignSpec, ...]
    window_hours: int = SYNTH_WINDOW_HOURS
    n_sources: int = 0
    target_top1pct_share: float | None = None
    start_epoch: int = SYNTH_START_EPOCH

    def validate(self) -> "SynthConfig":
        _exigir(isinstance(self.seed, int) and not isinstance(self.seed, bool)
                and 0 <= self.seed < 2 ** 64, "seed deve ser inteiro de 64 bits sem sinal")
        _exigir(self.window_hours >= 1, "window_hours deve ser >= 1")
        _exigir(self.start_epoch >= 0 and self.start_epoch % SECONDS_PER_HOUR == 0,
                "start_epoch deve ser epoch não negativo alinhado à hora")
        _exigir(len(self.campaigns) > 0, "nenhuma campanha declarada")
        if self.target_top1pct_share is not None:
            _exigir(0 < self.target_top1pct_share < 1, "target_top1pct_share fora de (0, 1)")
        for i, c in enumerate(self.campaigns):
            _validar_campanha(i, c, self.window_hours)
        soma = sum(c.sources for c in self.campaigns)
        _exigir(soma == self.n_sources,
                f"soma das fontes das campanhas ({soma}) difere de n_sources ({self.n_sources})")
        explicitos = [c.asn for c in self.campaigns if c.asn is not None]
        _exigir(len(explicitos) == len(set(explicitos)), "ASN explícito repetido entre campanhas")
        _exigir(sum(c.n_asns for c in self.campaigns) <= SYNTH_MAX_ASNS,
                f"mais de {SYNTH_MAX_ASNS} ASNs sintéticos")
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        if not isinstance(d, dict):
            raise InvalidConfigError("configuração sintética deve ser um objeto JSON")
        if d.get("seed") is None:
            raise ConfigError("configuração sintética sem 'seed' (obrigatório para reprodutibilidade)")
        extras = set(d) - {f.name for f in fields(cls)}
        if extras:
            raise InvalidConfigError(f"campo(s) desconhecido(s): {sorted(extras)}")
        campanhas = tuple(CampaignSpec.from_dict(c) for c in d.get("campaigns") or ())
        kw = {k: v for k, v in d.items() if k != "campaigns"}
        kw.setdefault("n_sources", sum(c.sources for c in campanhas))
        try:
            cfg = cls(campaigns=campanhas, **kw)
        except TypeError as exc:
            raise InvalidConfigError(f"configuração inválida: {exc}")
        return cfg.validate()

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "window_hours": self.window_hours,
            "n_sources": self.n_sources,
            "target_top1pct_share": self.target_top1pct_share,
            "start_epoch": self.start_epoch,
            "campaigns": [c.to_dict() for c in self.campaigns],
        }


def load_synth_config(path, seed: int | None = None) -> SynthConfig:
    """Lê o JSON de campanhas; ``seed`` (se informado) substitui o do arquivo."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            dados = json.load(fh)
    except OSError as exc:
        raise InputIOError(path, exc)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON inválido: {exc}")
    if seed is not None and isinstance(dados, dict):
        dados["seed"] = seed
    return SynthConfig.from_dict(dados)


# ==============================================================================
# GABARITO
# ==============================================================================

def _ordem_ip(ip: str) -> int:
    return int(IPv4Address(ip))


@dataclass(frozen=True)
class GroundTruth:
    scanner_sources: frozenset[str]
    backscatter_record_ids: frozenset[int]
    asn_class: dict[int, str]
    per_source_volume: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "scanner_sources": sorted(self.scanner_sources, key=_ordem_ip),
            "backscatter_record_ids": sorted(self.backscatter_record_ids),
            "asn_class": {str(a): c for a, c in sorted(self.asn_class.items())},
            "per_source_volume": {ip: self.per_source_volume[ip]
                                  for ip in sorted(self.per_source_volume, key=_ordem_ip)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(
            scanner_sources=frozenset(d.get("scanner_sources", ())),
            backscatter_record_ids=frozenset(int(i) for i in d.get("backscatter_record_ids", ())),
            asn_class={int(a): c for a, c in d.get("asn_class", {}).items()},
            per_source_volume={ip: int(v) for ip, v in d.get("per_source_volume", {}).items()},
        )


def load_ground_truth(path) -> GroundTruth:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            dados = json.load(fh)
    except OSError as exc:
        raise InputIOError(path, exc)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: gabarito não é JSON válido: {exc}")
    return GroundTruth.from_dict(dados)


# ==============================================================================
# PRIMITIVAS DE SORTEIO
# ==============================================================================

def _repartir(total: int, pesos) -> np.ndarray:
    """Divide ``total`` em partes inteiras >= 1 proporcionais a ``pesos`` (maiores restos)."""
    pesos = np.asarray(pesos, dtype=np.float64)
    n = pesos.size
    if total < n:
        raise InvalidConfigError(f"{total} pacotes não cobrem {n} portas")
    livre = total - n
    cotas = livre * pesos / pesos.sum()
    partes = np.floor(cotas).astype(np.int64)
    falta = livre - int(partes.sum())
    if falta > 0:
        ordem = np.argsort(-(cotas - partes), kind="stable")
        partes[ordem[:falta]] += 1
    return partes + 1


def _pareto_truncada(rng: np.random.Generator, alpha: float, xmin: float,
                     xmax: float, n: int) -> np.ndarray:
    """Amostras de Pareto(alpha) truncada em [xmin, xmax] por inversão da CDF."""
    u = rng.random(n)
    return xmin * (1.0 - u * (1.0 - (xmin / xmax) ** alpha)) ** (-1.0 / alpha)


def _fatia_topo(volumes: np.ndarray) -> float:
    n = volumes.size
    k = max(1, math.ceil(round(0.01 * n, 9)))
    ordenado = np.sort(volumes)[::-1]
    total = float(ordenado.sum())
    return float(ordenado[:k].sum()) / total if total else 0.0


def _calibrar(fixos: np.ndarray, fundo: np.ndarray, alvo: float) -> np.ndarray:
    """
    Reescala os volumes do fundo para que o 1% superior de todas as fontes
    carregue ``alvo`` do total. Fontes de campanhas fixas não mudam.

    Com fundo no topo, aplica x' = piso + c·(x − piso) nesse grupo, onde piso
    é o maior volume fora do topo (a pertença ao topo é preservada). Sem essa
    folga, reescala o fundo fora do topo, mantido abaixo do menor do topo.
    """
    f = fixos.astype(np.float64)
    x = fundo.astype(np.float64)
    n = f.size + x.size
    k = max(1, math.ceil(round(0.01 * n, 9)))
    todos = np.concatenate([f, x])
    ordem = np.argsort(-todos, kind="stable")
    topo = np.zeros(n, dtype=bool)
    topo[ordem[:k]] = True
    eh_fundo = np.zeros(n, dtype=bool)
    eh_fundo[f.size:] = True

    fundo_topo = np.flatnonzero(topo[f.size:])
    fundo_resto = np.flatnonzero(~topo[f.size:])
    resto = todos[~topo]
    R = float(resto.sum())
    piso = float(resto.max()) if resto.size else 0.0
    Ft = float(todos[topo & ~eh_fundo].sum())
    necessario = alvo / (1.0 - alvo) * R - Ft
    base = fundo_topo.size * piso
    excesso = float((x[fundo_topo] - piso).sum())

    if fundo_topo.size and necessario >= base and excesso > 0:
        c = (necessario - base) / excesso
        x[fundo_topo] = piso + c * (x[fundo_topo] - piso)
    elif fundo_resto.size:
        T = float(todos[topo].sum())
        Fr = float(todos[~topo & ~eh_fundo].sum())
        Br = float(x[fundo_resto].sum())
        b = (T * (1.0 - alvo) / alvo - Fr) / Br
        if b <= 0 or b * float(x[fundo_resto].max()) > float(todos[topo].min()):
            raise InvalidConfigError(
                f"fatia do 1% superior inatingível ({alvo:.2%}) com as campanhas fixas declaradas")
        x[fundo_resto] *= b
    else:
        raise InvalidConfigError("nenhuma fonte de fundo disponível para calibrar a concentração")

    saida = np.maximum(np.rint(x), 1).astype(np.int64)
    obtida = _fatia_topo(np.concatenate([fixos.astype(np.int64), saida]))
    if abs(obtida - alvo) > SYNTH_SHARE_TOLERANCE:
        raise InvalidConfigError(
            f"calibração obteve {obtida:.4f} para alvo {alvo:.4f} (tolerância {SYNTH_SHARE_TOLERANCE})")
    logger.info(f"  Concentração calibrada: 1% superior = {obtida:.4f} (alvo {alvo:.4f})")
    return saida


# ==============================================================================
# GERADOR
# ==============================================================================

class _Gerador:
    """Estado de uma geração: tabela de fontes, ASNs e linhas acumuladas."""

    def __init__(self, config: SynthConfig):
        self.cfg = config
        self.rng = np.random.Generator(np.random.PCG64(config.seed))
        self.fonte_ip: list[int] = []
        self.fonte_asn: list[int] = []
        self.fonte_ferramenta: list[str | None] = []
        self.asns: dict[int, tuple[IPv4Network, str, str]] = {}
        self.asn_campanha: dict[int, int] = {}
        self._reservados = {c.asn for c in config.campaigns if c.asn is not None}
        self._proximo_asn = SYNTH_ASN_BASE
        self._base_rede = int(IPv4Address(SYNTH_NETWORK_BASE))
        self._paises = np.array(list(BACKGROUND_COUNTRIES))
        pesos = np.array(list(BACKGROUND_COUNTRIES.values()), dtype=np.float64)
        self._pesos_paises = pesos / pesos.sum()
        # colunas das linhas: fonte, porta, hora, pacotes, código de flag
        self._linhas: list[tuple[np.ndarray, ...]] = []

    # ── ASNs e fontes ───────────────────────────────────────────────────
    def _novo_asn(self, i: int, c: CampaignSpec) -> int:
        if c.asn is not None:
            asn = c.asn
        else:
            while self._proximo_asn in self._reservados:
                self._proximo_asn += 1
            asn = self._proximo_asn
            self._proximo_asn += 1
        rede = IPv4Network((self._base_rede + len(self.asns) * 65536, 16))
        pais = c.country.upper() if c.country else str(
            self.rng.choice(self._paises, p=self._pesos_paises))
        self.asns[asn] = (rede, pais, c.org or f"Synthetic AS{asn}")
        self.asn_campanha[asn] = i
        return asn

    def _fontes(self, c: CampaignSpec, asns: list[int], atribuicao: np.ndarray) -> np.ndarray:
        """Cria uma fonte por posição de ``atribuicao`` (índice em ``asns``)."""
        ips = np.zeros(atribuicao.size, dtype=np.int64)
        for j, asn in enumerate(asns):
            membros = np.flatnonzero(atribuicao == j)
            if membros.size == 0:
                continue
            if membros.size > 65534:
                raise InvalidConfigError(f"AS{asn}: mais fontes do que endereços num /16")
            hosts = self.rng.choice(65534, size=membros.size, replace=False) + 1
            ips[membros] = int(self.asns[asn][0].network_address) + hosts
        inicio = len(self.fonte_ip)
        self.fonte_ip.extend(ips.tolist())
        self.fonte_asn.extend(asns[j] for j in atribuicao.tolist())
        self.fonte_ferramenta.extend([c.tool] * atribuicao.size)
        return np.arange(inicio, inicio + atribuicao.size, dtype=np.int64)

    def _portas(self, c: CampaignSpec) -> np.ndarray:
        if c.ports:
            return np.asarray(c.ports, dtype=np.int64)
        return self.rng.choice(65535, size=c.port_diversity, replace=False).astype(np.int64) + 1

    def _emitir(self, fonte, porta, hora, pacotes, flag=0) -> None:
        n = np.size(porta)
        self._linhas.append((
            np.broadcast_to(np.asarray(fonte, dtype=np.int64), (n,)),
            np.asarray(porta, dtype=np.int64),
            np.broadcast_to(np.asarray(hora, dtype=np.int64), (n,)),
            np.broadcast_to(np.asarray(pacotes, dtype=np.int64), (n,)),
            np.broadcast_to(np.asarray(flag, dtype=np.int64), (n,)),
        ))

    # ── campanhas ───────────────────────────────────────────────────────
    def _persistente(self, i: int, c: CampaignSpec) -> None:
        W = self.cfg.window_hours
        asns = [self._novo_asn(i, c) for _ in range(c.n_asns)]
        ids = self._fontes(c, asns, np.arange(c.sources) % len(asns))
        portas = self._portas(c)
        divisao = _repartir(c.packets_per_hour, 0.5 ** np.arange(portas.size))
        n_ativas = min(W, max(1, math.ceil(round(c.active_fraction * W, 9))))
        for fonte in ids:
            if n_ativas == W:
                horas = np.arange(W)
            else:
                horas = np.sort(self.rng.choice(W, size=n_ativas, replace=False))
            self._emitir(fonte, np.tile(portas, horas.size),
                         np.repeat(horas, portas.size), np.tile(divisao, horas.size))

    def _pico(self, i: int, c: CampaignSpec) -> None:
        asns = [self._novo_asn(i, c) for _ in range(c.n_asns)]
        ids = self._fontes(c, asns, np.arange(c.sources) % len(asns))
        portas = self._portas(c)
        divisao = _repartir(c.spike_packets, np.ones(portas.size))
        for fonte in ids:
            self._emitir(fonte, portas, c.spike_hour, divisao)

    def _surto(self, i: int, c: CampaignSpec) -> None:
        hora = self.cfg.window_hours - 1 if c.spike_hour is None else c.spike_hour
        asns = [self._novo_asn(i, c) for _ in range(c.sources)]
        ids = self._fontes(c, asns, np.arange(c.sources))
        for fonte in ids:
            portas = self._portas(c)
            self._emitir(fonte, portas, hora, _repartir(c.spike_packets, np.ones(portas.size)))

    def _backscatter(self, i: int, c: CampaignSpec) -> None:
        W = self.cfg.window_hours
        asns = [self._novo_asn(i, c) for _ in range(c.n_asns)]
        ids = self._fontes(c, asns, np.arange(c.sources) % len(asns))
        r = c.records_per_source
        for fonte in ids:
            portas = self.rng.choice(65536 - _PORTA_ALTA, size=r, replace=False) + _PORTA_ALTA
            horas = self.rng.integers(0, W, size=r)
            flags = self.rng.integers(1, len(_FLAGS), size=r)
            self._emitir(fonte, portas, horas, c.packets_per_record, flags)

    def _fundo_volumes(self, i: int, c: CampaignSpec) -> tuple[np.ndarray, np.ndarray]:
        asns = [self._novo_asn(i, c) for _ in range(c.n_asns)]
        zipf = 1.0 / np.arange(1, len(asns) + 1, dtype=np.float64)
        atribuicao = self.rng.choice(len(asns), size=c.sources, p=zipf / zipf.sum())
        ids = self._fontes(c, asns, atribuicao)
        volumes = _pareto_truncada(self.rng, c.pareto_alpha, c.volume_min,
                                   c.volume_max, c.sources)
        return ids, volumes

    def _fundo_linhas(self, c: CampaignSpec, ids: np.ndarray, volumes: np.ndarray,
                      progresso: bool) -> None:
        W = self.cfg.window_hours
        portas_bg = np.array(list(BACKGROUND_PORTS), dtype=np.int64)
        pesos = np.array(list(BACKGROUND_PORTS.values()), dtype=np.float64)
        pesos /= pesos.sum()
        # no máximo 4 portas por fonte: o ruído nunca cruza o limiar de varredura
        max_portas = min(SCAN_THRESHOLD - 1, portas_bg.size)
        for fonte, v in tqdm(zip(ids.tolist(), volumes.tolist()), total=ids.size,
                             desc="Ruído de fundo", unit=" fontes", disable=not progresso):
            r = min(c.records_per_source, v)
            k = min(int(self.rng.integers(1, max_portas + 1)), r)
            conjunto = self.rng.choice(portas_bg, size=k, replace=False, p=pesos)
            portas = conjunto[self.rng.integers(0, k, size=r)]
            horas = self.rng.integers(0, W, size=r)
            pacotes = 1 + self.rng.multinomial(v - r, np.full(r, 1.0 / r))
            self._emitir(fonte, portas, horas, pacotes)

    # ── montagem ────────────────────────────────────────────────────────
    def executar(self, progresso: bool = False) -> tuple[list[ConnectionRecord], GroundTruth]:
        cfg = self.cfg
        pendentes = []
        despacho = {
            "persistent_scanner": self._persistente,
            "bursty_spike": self._pico,
            "coordinated_surge": self._surto,
            "backscatter_victim": self._backscatter,
        }
        for i, c in enumerate(tqdm(cfg.campaigns, desc="Campanhas", disable=not progresso)):
            if c.kind == "background_noise":
                pendentes.append((c, *self._fundo_volumes(i, c)))
            else:
                despacho[c.kind](i, c)

        volumes_fundo = [v for _, _, v in pendentes]
        if pendentes:
            fundo = np.concatenate(volumes_fundo)
            if cfg.target_top1pct_share is None:
                fundo = np.maximum(np.rint(fundo), 1).astype(np.int64)
            else:
                fixos = self._volumes_fixos()
                fundo = _calibrar(fixos, fundo, cfg.target_top1pct_share)
            inicio = 0
            for c, ids, v in pendentes:
                self._fundo_linhas(c, ids, fundo[inicio:inicio + v.size], progresso)
                inicio += v.size
        elif cfg.target_top1pct_share is not None:
            raise InvalidConfigError("target_top1pct_share exige uma campanha background_noise")

        return self._montar()

    def _colunas(self) -> tuple[np.ndarray, ...]:
        if not self._linhas:
            raise InvalidConfigError("configuração não gerou nenhum registro")
        return tuple(np.concatenate([l[j] for l in self._linhas]) for j in range(5))

    def _volumes_fixos(self) -> np.ndarray:
        if not self._linhas:
            return np.zeros(0, dtype=np.int64)
        fonte, _, _, pacotes, _ = self._colunas()
        ids_fixos = np.unique(fonte)
        return np.bincount(fonte, weights=pacotes, minlength=len(self.fonte_ip))[ids_fixos].astype(np.int64)

    def _montar(self) -> tuple[list[ConnectionRecord], GroundTruth]:
        cfg = self.cfg
        fonte, porta, hora, pacotes, flag = self._colunas()
        n = fonte.size
        desloc = self.rng.integers(0, SECONDS_PER_HOUR, size=n)
        duracao = self.rng.integers(0, SECONDS_PER_HOUR - desloc)
        first = cfg.start_epoch + hora * SECONDS_PER_HOUR + desloc
        last = first + duracao
        ip_linha = np.asarray(self.fonte_ip, dtype=np.int64)[fonte]
        ordem = np.lexsort((porta, ip_linha, first))

        ip_txt = [str(IPv4Address(ip)) for ip in self.fonte_ip]
        info_asn = {asn: (str(rede), pais, org) for asn, (rede, pais, org) in self.asns.items()}
        registros: list[ConnectionRecord] = []
        for s, p, pk, f0, f1, fl in zip(fonte[ordem].tolist(), porta[ordem].tolist(),
                                        pacotes[ordem].tolist(), first[ordem].tolist(),
                                        last[ordem].tolist(), flag[ordem].tolist()):
            asn = self.fonte_asn[s]
            prefixo, pais, org = info_asn[asn]
            ferramenta = self.fonte_ferramenta[s]
            dests = min(pk, SYNTH_DESTS)
            registros.append(ConnectionRecord(
                source_ip=ip_txt[s], port=p, packets=pk, first=f0, last=f1,
                traffic="tcp", bytes=pk * SYNTH_BYTES_PER_PACKET,
                unique_dests=dests, unique_dest24s=min(dests, SYNTH_DEST24S),
                country=pais, asn=asn, org=org, prefix=prefixo,
                zmap=ferramenta == "zmap", masscan=ferramenta == "masscan",
                mirai=ferramenta == "mirai", samples=1, tcp=True, icmp=False,
                tcp_flags=_FLAGS[fl],
            ))

        volume = np.bincount(fonte, weights=pacotes, minlength=len(self.fonte_ip)).astype(np.int64)
        pares = np.unique(fonte * 65536 + porta)
        portas_por_fonte = np.bincount(pares // 65536, minlength=len(self.fonte_ip))
        scanners = frozenset(ip_txt[s] for s in np.flatnonzero(portas_por_fonte >= SCAN_THRESHOLD))
        backscatter = frozenset(np.flatnonzero(flag[ordem] != 0).tolist())
        classes = {
            asn: SYNTH_ASN_CLASS[cfg.campaigns[i].kind]
            for asn, i in self.asn_campanha.items()
            if cfg.campaigns[i].kind in SYNTH_ASN_CLASS
        }
        gabarito = GroundTruth(
            scanner_sources=scanners,
            backscatter_record_ids=backscatter,
            asn_class=dict(sorted(classes.items())),
            per_source_volume={ip_txt[s]: int(volume[s]) for s in range(len(ip_txt))},
        )
        return registros, gabarito


def generate(config: SynthConfig, progresso: bool = False,
             ) -> tuple[list[ConnectionRecord], GroundTruth]:
    """
    Gera o corpus e o gabarito. Determinístico para a mesma configuração.
    Registros ordenados por (first, IP de origem, porta); os índices de
    backscatter referem-se a essa ordem.
    """
    config.validate()
    registros, gabarito = _Gerador(config).executar(progresso)
    logger.info(f"  {len(registros)} registros de {config.n_sources} fontes; "
                f"{len(gabarito.scanner_sources)} scanners, "
                f"{len(gabarito.backscatter_record_ids)} registros de backscatter")
    return registros, gabarito


# ==============================================================================
# GRAVAÇÃO
# ==============================================================================

def write_corpus(records: Iterable[ConnectionRecord], path, validar: bool = True) -> str:
    """Grava o corpus no formato do export e devolve o SHA-256 do arquivo."""
    path = Path(path)
    colunas = list(DEFAULT_SCHEMA)
    try:
        with open(path, "w", encoding=CSV_ENCODING, newline="") as fh:
            w = csv.writer(fh)
            w.writerow(colunas)
            for rec in records:
                linha = record_to_row(rec)
                if validar:
                    res = validate_record(linha, TimestampFormat.EPOCH)
                    if isinstance(res, RejectReason):
                        raise InvalidConfigError(
                            f"registro sintético rejeitado ({res.value}): {linha}")
                w.writerow([linha[c] for c in colunas])
        return file_digest(path)
    except OSError as exc:
        raise InputIOError(path, exc)


def write_ground_truth(truth: GroundTruth, config: SynthConfig, path,
                       corpus_sha256: str = "", record_count: int = 0) -> Path:
    path = Path(path)
    doc = {
        "generator": {"algorithm": SYNTH_ALGORITHM, "seed": config.seed},
        "config": config.to_dict(),
        "corpus_sha256": corpus_sha256,
        "record_count": record_count,
        **truth.to_dict(),
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise InputIOError(path, exc)
    return path


def snapshot_from_records(records: Iterable[ConnectionRecord],
                          snapshot_date: str = "") -> EnrichmentSnapshot:
    """Snapshot de enriquecimento com um prefixo por ASN presente no corpus."""
    vistos: dict[str, SnapshotEntry] = {}
    for r in records:
        if r.prefix and r.prefix not in vistos:
            vistos[r.prefix] = SnapshotEntry(IPv4Network(r.prefix), r.country, r.asn, r.org)
    return EnrichmentSnapshot.build(vistos.values(), snapshot_date)


# ==============================================================================
# AVALIAÇÃO CONTRA O GABARITO
# ==============================================================================

def _precisao_revocacao(previsto: set, real: set) -> dict:
    vp = len(previsto & real)
    return {
        "true_positives": vp,
        "false_positives": len(previsto - real),
        "false_negatives": len(real - previsto),
        "precision": vp / len(previsto) if previsto else 1.0,
        "recall": vp / len(real) if real else 1.0,
    }


def evaluate_against_truth(labels: DetectionLabels,
                           burstiness: Iterable[BurstinessClass],
                           truth: GroundTruth) -> dict:
    """Precisão/revocação de scanners e backscatter; acerto das classes por ASN."""
    observadas = {b.asn: b.burst_class for b in burstiness}
    asns = {
        str(asn): {"expected": esperada, "observed": observadas.get(asn)}
        for asn, esperada in sorted(truth.asn_class.items())
    }
    erros = sum(1 for v in asns.values() if v["expected"] != v["observed"])
    return {
        "scanners": _precisao_revocacao(set(labels.scanners), set(truth.scanner_sources)),
        "backscatter": _precisao_revocacao(set(labels.backscatter_records),
                                           set(truth.backscatter_record_ids)),
        "asn_classes": asns,
        "asn_misclassified": erros,
        "asn_agreement": (len(asns) - erros) / len(asns) if asns else 1.0,
    }


# ==============================================================================
# EXECUÇÃO
# ==============================================================================

def executar_sintese(config: SynthConfig, out_dir, progresso: bool = False) -> dict:
    """Gera o corpus, o gabarito e o snapshot em ``out_dir``."""
    logger.info("=" * 60)
    logger.info("FASE 0 — Corpus Sintético")
    logger.info("=" * 60)
    logger.info(f"  Gerador {SYNTH_ALGORITHM}, seed={config.seed}, "
                f"{len(config.campaigns)} campanhas, janela de {config.window_hours} h")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputIOError(out_dir, exc)

    registros, gabarito = generate(config, progresso)
    corpus = out_dir / SYNTH_CORPUS_NAME
    digest = write_corpus(registros, corpus)
    sidecar = write_ground_truth(gabarito, config, out_dir / SYNTH_TRUTH_NAME,
                                 digest, len(registros))
    data = datetime.fromtimestamp(config.start_epoch, tz=timezone.utc).date().isoformat()
    snapshot = write_snapshot(snapshot_from_records(registros, data),
                              out_dir / SYNTH_SNAPSHOT_NAME)
    logger.info(f"  ✓ {corpus.name} (sha256 {digest[:12]}…), {sidecar.name}, {snapshot.name}")
    return {"corpus": corpus, "ground_truth": sidecar, "snapshot": snapshot,
            "corpus_sha256": digest, "records": len(registros)}
