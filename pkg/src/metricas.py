# -*- coding: utf-8 -*-
"""
Fase 4 — Estatísticas de concentração, entropia e burstiness.

  • Curva de Lorenz e coeficiente de Gini sobre o volume por fonte
  • Tabela de concentração nos percentis superiores de fontes
  • Série horária de entropia de Shannon (portas e ASNs), bruta e normalizada
  • Classificação volume × constância temporal por ASN
  • Rankings top-N (países, ASNs, portas)

Todas as agregações passam por ``AgregadoParcial``, cujo ``merge`` é
comutativo e associativo; as estatísticas finais são calculadas uma única
vez sobre o estado consolidado, ordenado por chave.
"""

import logging
import math
from dataclasses import asdict, dataclass
from ipaddress import IPv4Address
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.stats import entropy as _scipy_entropy

from src.config import (
    BURST_ACTIVITY_HIGH, BURST_VOLUME_HIGH, BURSTINESS_CLASSES, ENTROPY_WEIGHT,
    ENTROPY_WEIGHTS, FSUM_THRESHOLD, SECONDS_PER_HOUR,
)
from src.erros import AllZeroVolumesError, EmptyInputError
from src.registro import ConnectionRecord

logger = logging.getLogger(__name__)


# ==============================================================================
# TIPOS
# ==============================================================================

@dataclass(frozen=True)
class HourWindow:
    """Janela de observação em índices de hora, inclusiva nas duas pontas."""
    start: int
    end: int

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"janela inválida: {self.start}..{self.end}")

    @property
    def hours(self) -> int:
        return self.end - self.start + 1

    def range(self) -> range:
        return range(self.start, self.end + 1)

    def contains(self, hora: int) -> bool:
        return self.start <= hora <= self.end

    @classmethod
    def from_epochs(cls, first: int, last: int) -> "HourWindow":
        return cls(hour_bucket(first), hour_bucket(last))

    @classmethod
    def covering(cls, horas: Iterable[int]) -> "HourWindow":
        horas = list(horas)
        if not horas:
            raise EmptyInputError("janela sem horas")
        return cls(min(horas), max(horas))


@dataclass(frozen=True)
class LorenzResult:
    lorenz_points: tuple[tuple[float, float], ...]
    gini: float


@dataclass(frozen=True)
class PercentileRow:
    percentile: float
    ip_count: int
    packet_volume: int
    cumulative_share: float


@dataclass(frozen=True)
class PercentileTable:
    rows: tuple[PercentileRow, ...]
    unique_sources: int
    total_packets: int

    def share_at(self, p: float) -> float:
        for r in self.rows:
            if math.isclose(r.percentile, p):
                return r.cumulative_share
        raise KeyError(p)


@dataclass(frozen=True)
class EntropyRow:
    hour: int
    total_packets: int
    raw_port_entropy: float
    raw_asn_entropy: float
    norm_port_entropy: float
    norm_asn_entropy: float
    distinct_ports: int
    distinct_asns: int
    minmax_port_entropy: float = 0.0
    minmax_asn_entropy: float = 0.0


@dataclass(frozen=True)
class EntropySeries:
    rows: tuple[EntropyRow, ...]
    weight: str = ENTROPY_WEIGHT

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.rows],
                            columns=list(EntropyRow.__dataclass_fields__))

    def peak_hour(self, coluna: str = "total_packets") -> int:
        melhor = max(self.rows, key=lambda r: (getattr(r, coluna), -r.hour))
        return melhor.hour


@dataclass(frozen=True)
class BurstinessClass:
    asn: int
    total_packets: int
    active_hours: int
    activity_ratio: float
    burst_class: str


# ==============================================================================
# OPERAÇÕES ELEMENTARES
# ==============================================================================

def hour_bucket(epoch_seconds) -> int:
    """Índice da hora: floor(epoch / 3600)."""
    if epoch_seconds < 0:
        raise ValueError(f"epoch negativo: {epoch_seconds}")
    return int(epoch_seconds // SECONDS_PER_HOUR)


def _soma(valores: np.ndarray) -> float:
    if valores.size > FSUM_THRESHOLD:
        return math.fsum(valores.tolist())
    return float(valores.sum())


def lorenz_gini(volumes: Sequence[float]) -> LorenzResult:
    """
    Curva de Lorenz (ordem crescente) e Gini pela fórmula de postos:
    G = 2·Σ i·x(i) / (n·Σx) − (n+1)/n, com postos a partir de 1.
    """
    x = np.sort(np.asarray(list(volumes), dtype=np.float64))
    if x.size == 0:
        raise EmptyInputError("lorenz_gini: entrada vazia")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("lorenz_gini: volumes devem ser reais não negativos")
    total = _soma(x)
    if total <= 0:
        raise AllZeroVolumesError("lorenz_gini: todos os volumes são zero")

    n = x.size
    postos = np.arange(1, n + 1, dtype=np.float64)
    ponderada = _soma(postos * x)
    gini = 2.0 * ponderada / (n * total) - (n + 1.0) / n
    gini = min(max(gini, 0.0), 1.0)

    acumulado = np.cumsum(x) / total
    pontos = [(0.0, 0.0)]
    pontos += [(k / n, float(min(y, k / n))) for k, y in enumerate(acumulado[:-1], start=1)]
    pontos.append((1.0, 1.0))
    return LorenzResult(lorenz_points=tuple(pontos), gini=float(gini))


def _chave_ip(valor) -> tuple:
    try:
        return (0, int(IPv4Address(str(valor))), "")
    except ValueError:
        return (1, 0, str(valor))


def _contagem_topo(p: float, n: int) -> int:
    if not 0 < p <= 1:
        raise ValueError(f"percentil fora de (0, 1]: {p}")
    # arredonda antes do teto para absorver ruído de ponto flutuante (0.07·100)
    return max(1, math.ceil(round(p * n, 9)))


def percentile_table(per_source_volumes: Mapping[str, int],
                     percentiles: Iterable[float]) -> PercentileTable:
    """
    Fontes ordenadas por volume decrescente (empate: IP crescente); para cada
    p, as ceil(p·n) primeiras, seu volume e a fração do total.
    """
    if not per_source_volumes:
        raise EmptyInputError("percentile_table: nenhuma fonte")
    ordenado = sorted(per_source_volumes.items(),
                      key=lambda kv: (-kv[1], _chave_ip(kv[0])))
    volumes = np.fromiter((v for _, v in ordenado), dtype=np.int64, count=len(ordenado))
    acumulado = np.cumsum(volumes)
    total = int(acumulado[-1])
    n = len(ordenado)
    linhas = []
    for p in sorted(set(float(p) for p in percentiles)):
        k = _contagem_topo(p, n)
        vol = int(acumulado[k - 1])
        linhas.append(PercentileRow(p, k, vol, vol / total if total else 0.0))
    return PercentileTable(tuple(linhas), unique_sources=n, total_packets=total)


def _entropia_vetor(contagens: np.ndarray) -> float:
    positivos = contagens[contagens > 0]
    if positivos.size <= 1:
        return 0.0
    h = float(_scipy_entropy(positivos, base=2))
    return min(max(h, 0.0), math.log2(positivos.size))


def shannon_entropy(counts: Mapping) -> float:
    """H = −Σ p·log2(p) sobre as categorias com contagem positiva (bits)."""
    valores = np.asarray(list(counts.values()), dtype=np.float64)
    if valores.size and np.any(valores < 0):
        raise ValueError("shannon_entropy: contagens negativas")
    if valores.size == 0 or not np.any(valores > 0):
        raise EmptyInputError("shannon_entropy: entrada vazia ou só com zeros")
    return _entropia_vetor(valores)


def top_n(groupings: Mapping, n: int) -> list[tuple]:
    """Decrescente por pacotes, empate pela chave crescente."""
    if n < 1:
        raise ValueError(f"n deve ser >= 1 (recebido {n})")
    return sorted(groupings.items(), key=lambda kv: (-kv[1], kv[0]))[:n]


# ==============================================================================
# AGREGADO PARCIAL
# ==============================================================================

_COLUNAS_FRAME = ("source_ip", "port", "packets", "hour", "asn", "country", "org")


def records_to_frame(records: Iterable[ConnectionRecord]) -> pd.DataFrame:
    """Projeção colunar mínima dos registros para as agregações."""
    linhas = [(r.source_ip, r.port, r.packets, hour_bucket(r.first), r.asn,
               r.country, r.org) for r in records]
    df = pd.DataFrame.from_records(linhas, columns=list(_COLUNAS_FRAME))
    return df.astype({"port": "int64", "packets": "int64", "hour": "int64",
                      "asn": "int64"})


def _serie_vazia(nomes: Sequence[str]) -> pd.Series:
    if len(nomes) == 1:
        idx = pd.Index([], name=nomes[0])
    else:
        idx = pd.MultiIndex.from_arrays([[] for _ in nomes], names=list(nomes))
    return pd.Series([], index=idx, dtype="int64")


def _somar(a: pd.Series, b: pd.Series) -> pd.Series:
    if a.empty:
        return b.sort_index()
    if b.empty:
        return a.sort_index()
    return a.add(b, fill_value=0).astype("int64").sort_index()


@dataclass
class AgregadoParcial:
    """Somas por chave; ``merge`` é comutativo e associativo."""
    hora_porta_pacotes: pd.Series
    hora_porta_registros: pd.Series
    hora_asn_pacotes: pd.Series
    hora_asn_registros: pd.Series
    fonte_pacotes: pd.Series
    pais_pacotes: pd.Series
    asn_org: dict

    @classmethod
    def vazio(cls) -> "AgregadoParcial":
        return cls(
            _serie_vazia(("hour", "port")), _serie_vazia(("hour", "port")),
            _serie_vazia(("hour", "asn")), _serie_vazia(("hour", "asn")),
            _serie_vazia(("source_ip",)), _serie_vazia(("country",)), {},
        )

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "AgregadoParcial":
        if df.empty:
            return cls.vazio()
        hp = df.groupby(["hour", "port"], sort=True)["packets"].agg(["sum", "size"])
        ha = df.groupby(["hour", "asn"], sort=True)["packets"].agg(["sum", "size"])
        orgs = df.loc[df["org"] != ""].groupby("asn")["org"].min()
        return cls(
            hora_porta_pacotes=hp["sum"].astype("int64"),
            hora_porta_registros=hp["size"].astype("int64"),
            hora_asn_pacotes=ha["sum"].astype("int64"),
            hora_asn_registros=ha["size"].astype("int64"),
            fonte_pacotes=df.groupby("source_ip")["packets"].sum().astype("int64"),
            pais_pacotes=df.groupby("country")["packets"].sum().astype("int64"),
            asn_org={int(k): v for k, v in orgs.items()},
        )

    @classmethod
    def from_records(cls, records: Iterable[ConnectionRecord]) -> "AgregadoParcial":
        return cls.from_frame(records_to_frame(records))

    def merge(self, outro: "AgregadoParcial") -> "AgregadoParcial":
        orgs = dict(self.asn_org)
        for asn, org in outro.asn_org.items():
            orgs[asn] = min(org, orgs[asn]) if asn in orgs else org
        return AgregadoParcial(
            _somar(self.hora_porta_pacotes, outro.hora_porta_pacotes),
            _somar(self.hora_porta_registros, outro.hora_porta_registros),
            _somar(self.hora_asn_pacotes, outro.hora_asn_pacotes),
            _somar(self.hora_asn_registros, outro.hora_asn_registros),
            _somar(self.fonte_pacotes, outro.fonte_pacotes),
            _somar(self.pais_pacotes, outro.pais_pacotes),
            dict(sorted(orgs.items())),
        )

    # ── totais derivados ────────────────────────────────────────────────
    @property
    def total_packets(self) -> int:
        return int(self.fonte_pacotes.sum())

    def _por_nivel(self, s: pd.Series, nivel: str) -> dict:
        if s.empty:
            return {}
        return {k: int(v) for k, v in s.groupby(level=nivel).sum().items()}

    def porta_pacotes(self) -> dict[int, int]:
        return self._por_nivel(self.hora_porta_pacotes, "port")

    def porta_registros(self) -> dict[int, int]:
        return self._por_nivel(self.hora_porta_registros, "port")

    def asn_pacotes(self) -> dict[int, int]:
        return self._por_nivel(self.hora_asn_pacotes, "asn")

    def hora_pacotes(self) -> dict[int, int]:
        return self._por_nivel(self.hora_porta_pacotes, "hour")

    def pais_dict(self) -> dict[str, int]:
        return {str(k): int(v) for k, v in self.pais_pacotes.items()}

    def fonte_dict(self) -> dict[str, int]:
        return {str(k): int(v) for k, v in self.fonte_pacotes.items()}

    def janela(self) -> HourWindow:
        return HourWindow.covering(self.hora_pacotes())


# ==============================================================================
# SÉRIES E CLASSIFICAÇÕES SOBRE O AGREGADO
# ==============================================================================

def _entropia_horaria(s: pd.Series, janela: HourWindow) -> tuple[dict, dict]:
    """{hora: H} e {hora: K} a partir de uma série (hora, categoria) → peso."""
    if s.empty:
        return {}, {}
    grupos = s.groupby(level="hour")
    h = {int(k): _entropia_vetor(g.to_numpy(dtype=np.float64)) for k, g in grupos}
    k = {int(hora): int((g > 0).sum()) for hora, g in grupos}
    fora = [hora for hora in h if not janela.contains(hora)]
    if fora:
        raise ValueError(f"registros fora da janela {janela.start}..{janela.end}: hora {fora[0]}")
    return h, k


def _minmax(valores: list[float]) -> list[float]:
    lo, hi = min(valores), max(valores)
    if hi - lo <= 0:
        return [0.0] * len(valores)
    return [(v - lo) / (hi - lo) for v in valores]


def entropy_series_from(agregado: AgregadoParcial, window: HourWindow | None = None,
                        weight: str = ENTROPY_WEIGHT) -> EntropySeries:
    if weight not in ENTROPY_WEIGHTS:
        raise ValueError(f"peso de entropia desconhecido: {weight}")
    if window is None:
        window = agregado.janela()
    if weight == "packets":
        sp, sa = agregado.hora_porta_pacotes, agregado.hora_asn_pacotes
    else:
        sp, sa = agregado.hora_porta_registros, agregado.hora_asn_registros
    hp, kp = _entropia_horaria(sp, window)
    ha, ka = _entropia_horaria(sa, window)
    volume = agregado.hora_pacotes()

    horas = list(window.range())
    bruta_p = [hp.get(h, 0.0) for h in horas]
    bruta_a = [ha.get(h, 0.0) for h in horas]
    mm_p, mm_a = _minmax(bruta_p), _minmax(bruta_a)

    def _norm(hbits: float, k: int) -> float:
        if k < 2:
            return 0.0
        return min(max(hbits / math.log2(k), 0.0), 1.0)

    linhas = []
    for i, h in enumerate(horas):
        linhas.append(EntropyRow(
            hour=h,
            total_packets=volume.get(h, 0),
            raw_port_entropy=bruta_p[i],
            raw_asn_entropy=bruta_a[i],
            norm_port_entropy=_norm(bruta_p[i], kp.get(h, 0)),
            norm_asn_entropy=_norm(bruta_a[i], ka.get(h, 0)),
            distinct_ports=kp.get(h, 0),
            distinct_asns=ka.get(h, 0),
            minmax_port_entropy=mm_p[i],
            minmax_asn_entropy=mm_a[i],
        ))
    return EntropySeries(tuple(linhas), weight)


def entropy_series(records: Iterable[ConnectionRecord], window: HourWindow | None = None,
                   weight: str = ENTROPY_WEIGHT) -> EntropySeries:
    """
    Entropia por hora das portas e dos ASNs (ponderada por pacotes por padrão).
    Normalização: H / log2(K) da própria hora quando K >= 2, senão 0. Horas
    sem tráfego aparecem como linhas zeradas.
    """
    return entropy_series_from(AgregadoParcial.from_records(records), window, weight)


_PERSISTENTE, _RAJADA, _EPISODICO, _FUNDO = BURSTINESS_CLASSES


def _classe(total: int, razao: float, vol_alto: float, ativ: float) -> str:
    if total >= vol_alto:
        return _PERSISTENTE if razao >= ativ else _RAJADA
    return _EPISODICO if razao < ativ else _FUNDO


def classify_burstiness_from(agregado: AgregadoParcial, window: HourWindow | None = None,
                             volume_threshold_high: float = BURST_VOLUME_HIGH,
                             activity_threshold: float = BURST_ACTIVITY_HIGH,
                             ) -> list[BurstinessClass]:
    if volume_threshold_high <= 0 or activity_threshold <= 0:
        raise ValueError("limiares de burstiness devem ser positivos")
    s = agregado.hora_asn_pacotes
    if s.empty:
        return []
    if window is None:
        window = agregado.janela()
    horas = s.index.get_level_values("hour")
    if horas.min() < window.start or horas.max() > window.end:
        raise ValueError(f"registros fora da janela {window.start}..{window.end}")
    por_asn = s.groupby(level="asn")
    totais = por_asn.sum()
    ativas = (s > 0).groupby(level="asn").sum()
    saida = []
    for asn in totais.index:
        total = int(totais[asn])
        n_ativas = int(ativas[asn])
        razao = n_ativas / window.hours
        saida.append(BurstinessClass(
            asn=int(asn), total_packets=total, active_hours=n_ativas,
            activity_ratio=razao,
            burst_class=_classe(total, razao, volume_threshold_high, activity_threshold),
        ))
    saida.sort(key=lambda b: (-b.total_packets, b.asn))
    return saida


def classify_burstiness(records: Iterable[ConnectionRecord], window: HourWindow | None = None,
                        volume_threshold_high: float = BURST_VOLUME_HIGH,
                        activity_threshold: float = BURST_ACTIVITY_HIGH,
                        ) -> list[BurstinessClass]:
    """
    Por ASN: volume total × fração de horas ativas na janela.

      persistent_high  volume alto, ativo em >= ``activity_threshold`` das horas
      bursty_high      volume alto, pouco constante
      episodic_minor   volume baixo, pouco constante
      background       volume baixo, constante
    """
    return classify_burstiness_from(AgregadoParcial.from_records(records), window,
                                    volume_threshold_high, activity_threshold)


def hourly_asn_series(agregado: AgregadoParcial, n: int,
                      window: HourWindow | None = None) -> pd.DataFrame:
    """Pacotes por hora dos ``n`` maiores ASNs e o total da hora (formato longo)."""
    colunas = ["hour", "series", "packets"]
    if agregado.hora_asn_pacotes.empty:
        return pd.DataFrame(columns=colunas)
    if window is None:
        window = agregado.janela()
    topo = [asn for asn, _ in top_n(agregado.asn_pacotes(), n)]
    tabela = agregado.hora_asn_pacotes.unstack("asn", fill_value=0)
    tabela = tabela.reindex(index=list(window.range()), fill_value=0)
    volume = agregado.hora_pacotes()
    linhas = []
    for h in window.range():
        for asn in topo:
            linhas.append((h, f"AS{asn}", int(tabela.at[h, asn])))
        linhas.append((h, "total", int(volume.get(h, 0))))
    return pd.DataFrame(linhas, columns=colunas)
