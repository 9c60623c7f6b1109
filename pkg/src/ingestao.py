# -*- coding: utf-8 -*-
"""
Fase 1 — Carga e limpeza dos registros do telescópio.

Lê o export CSV (RFC 4180, cabeçalho obrigatório) de forma preguiçosa, valida
cada linha e contabiliza as rejeições por motivo. Nenhum arquivo é
materializado por inteiro: a leitura anda em lotes de ``CHUNK_SIZE`` linhas.
"""

import csv
import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from tqdm import tqdm

from src.config import (
    CHUNK_SIZE, CRITICAL_COLUMNS, CSV_ENCODING, DEFAULT_SCHEMA, REJECT_COLUMN,
)
from src.erros import InputFormatError, InputIOError, MissingCriticalColumnError
from src.registro import (
    MALFORMED_KEY, ConnectionRecord, RejectReason, TimestampFormat,
    detect_timestamp_format, validate_record,
)

logger = logging.getLogger(__name__)

LINE_KEY = "__line__"


@dataclass
class CleaningReport:
    rows_read: int = 0
    rows_retained: int = 0
    rejected_by_reason: dict[str, int] = field(default_factory=dict)

    @property
    def rows_rejected(self) -> int:
        return sum(self.rejected_by_reason.values())

    def check_conservation(self) -> "CleaningReport":
        assert self.rows_read == self.rows_retained + self.rows_rejected, (
            f"conservação violada: lidas={self.rows_read} "
            f"retidas={self.rows_retained} rejeitadas={self.rows_rejected}")
        return self

    def merge(self, outro: "CleaningReport") -> "CleaningReport":
        motivos = Counter(self.rejected_by_reason)
        motivos.update(outro.rejected_by_reason)
        return CleaningReport(
            rows_read=self.rows_read + outro.rows_read,
            rows_retained=self.rows_retained + outro.rows_retained,
            rejected_by_reason=dict(sorted(motivos.items())),
        )

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_retained": self.rows_retained,
            "rejected_by_reason": dict(sorted(self.rejected_by_reason.items())),
        }


@dataclass
class Lote:
    """Um lote de registros aceitos e a contabilidade das linhas que o geraram."""
    records: list[ConnectionRecord]
    report: CleaningReport
    offset: int          # índice global do primeiro registro retido do lote


# ── leitura CSV ──────────────────────────────────────────────────────────────

def _ler_cabecalho(reader, path=None) -> list[str]:
    try:
        header = next(reader)
    except StopIteration:
        header = []
    except csv.Error as exc:
        raise InputFormatError(f"{path or '<stream>'}:1: cabeçalho ilegível: {exc}")
    header = [h.strip() for h in header]
    if header:
        header[0] = header[0].lstrip("\ufeff")
    faltando = [c for c in CRITICAL_COLUMNS if c not in header]
    if faltando:
        raise MissingCriticalColumnError(faltando, path=path, line=1)
    return header


def _iterar_linhas(reader, header: list[str], schema: Iterable[str]) -> Iterator[dict]:
    colunas = set(schema)
    indices = [(i, nome) for i, nome in enumerate(header) if nome in colunas]
    while True:
        try:
            row = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            logger.debug(f"Linha {reader.line_num} malformada: {exc}")
            yield {MALFORMED_KEY: "1", LINE_KEY: reader.line_num}
            continue
        if not row:
            # linha física em branco não é linha de dados; fica fora de rows_read
            continue
        if len(row) != len(header):
            raw = {nome: row[i] for i, nome in indices if i < len(row)}
            raw[MALFORMED_KEY] = "1"
        else:
            raw = {nome: row[i] for i, nome in indices}
        raw[LINE_KEY] = reader.line_num
        yield raw


def parse_csv(stream: TextIO, schema: Iterable[str] = DEFAULT_SCHEMA,
              path=None) -> Iterator[dict]:
    """
    Gera um mapa bruto por linha de dados.

    A ordem das colunas vem do cabeçalho; o cabeçalho é verificado antes da
    primeira linha ser produzida. Linhas com contagem de campos divergente
    saem marcadas como malformadas.
    """
    reader = csv.reader(stream)
    header = _ler_cabecalho(reader, path)
    yield from _iterar_linhas(reader, header, schema)


# ── ingestão ─────────────────────────────────────────────────────────────────

class _EscritorRejeitos:
    """Grava as linhas rejeitadas num arquivo lateral (mesmo formato + motivo)."""

    def __init__(self, path: Path, header: list[str]):
        self.path = Path(path)
        self.colunas = [h for h in header if h != REJECT_COLUMN]
        try:
            self._fh = open(self.path, "w", encoding=CSV_ENCODING, newline="")
        except OSError as exc:
            raise InputIOError(self.path, exc)
        self._w = csv.writer(self._fh)
        self._w.writerow(self.colunas + [REJECT_COLUMN])

    def write(self, raw: dict, motivo: RejectReason) -> None:
        self._w.writerow([raw.get(c, "") for c in self.colunas] + [motivo.value])

    def close(self) -> None:
        self._fh.close()


def iter_chunks(path, schema: Iterable[str] = DEFAULT_SCHEMA,
                chunk_size: int = CHUNK_SIZE, rejects_path=None,
                progresso: bool = False) -> Iterator[Lote]:
    """Lê o arquivo em lotes de até ``chunk_size`` linhas de dados."""
    if chunk_size < 1:
        raise ValueError("chunk_size deve ser >= 1")
    path = Path(path)
    schema = tuple(schema)
    try:
        fh = open(path, "r", encoding=CSV_ENCODING, newline="")
    except OSError as exc:
        raise InputIOError(path, exc)

    rejeitos = None
    barra = tqdm(desc=f"Lendo {path.name}", unit=" linhas", disable=not progresso)
    try:
        reader = csv.reader(fh)
        header = _ler_cabecalho(reader, path)
        if rejects_path is not None:
            rejeitos = _EscritorRejeitos(rejects_path, header)

        formato: TimestampFormat | None = None
        retidos: list[ConnectionRecord] = []
        motivos: Counter = Counter()
        lidas = 0
        offset = 0

        def _fechar_lote() -> Lote:
            rep = CleaningReport(
                rows_read=lidas, rows_retained=len(retidos),
                rejected_by_reason=dict(sorted(
                    (m.value, n) for m, n in motivos.items())),
            ).check_conservation()
            return Lote(records=list(retidos), report=rep, offset=offset)

        for raw in _iterar_linhas(reader, header, schema):
            lidas += 1
            res = validate_record(raw, formato)
            if isinstance(res, RejectReason):
                motivos[res] += 1
                if rejeitos is not None:
                    rejeitos.write(raw, res)
            else:
                if formato is None:
                    formato = detect_timestamp_format(raw.get("First"))
                    if formato is not None:
                        logger.info(f"  {path.name}: carimbos em formato {formato.value}")
                retidos.append(res)
            if lidas == chunk_size:
                lote = _fechar_lote()
                barra.update(lidas)
                offset += len(retidos)
                retidos, motivos, lidas = [], Counter(), 0
                yield lote
        if lidas:
            barra.update(lidas)
            yield _fechar_lote()
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"{path}: conteúdo não é UTF-8 válido: {exc}")
    except OSError as exc:
        raise InputIOError(path, exc)
    finally:
        barra.close()
        if rejeitos is not None:
            rejeitos.close()
        fh.close()


def ingest_file(path, schema: Iterable[str] = DEFAULT_SCHEMA,
                chunk_size: int = CHUNK_SIZE, rejects_path=None,
                ) -> tuple[list[ConnectionRecord], CleaningReport]:
    """Compõe ``parse_csv`` e ``validate_record``; preserva a ordem de entrada."""
    registros: list[ConnectionRecord] = []
    rep = CleaningReport()
    for lote in iter_chunks(path, schema, chunk_size, rejects_path):
        registros.extend(lote.records)
        rep = rep.merge(lote.report)
    return registros, rep.check_conservation()


def executar_validacao(paths: Iterable, schema: Iterable[str] = DEFAULT_SCHEMA,
                       chunk_size: int = CHUNK_SIZE, rejects_dir=None,
                       progresso: bool = False) -> CleaningReport:
    """Roda apenas a ingestão e devolve o relatório de limpeza consolidado."""
    logger.info("=" * 60)
    logger.info("FASE 1 — Carga e Limpeza")
    logger.info("=" * 60)
    total = CleaningReport()
    for path in paths:
        rep = CleaningReport()
        for lote in iter_chunks(path, schema, chunk_size,
                                rejects_sidecar(path, rejects_dir), progresso):
            rep = rep.merge(lote.report)
        rep.check_conservation()
        logger.info(f"  {Path(path).name}: {rep.rows_read} lidas → "
                    f"{rep.rows_retained} retidas")
        for motivo, n in sorted(rep.rejected_by_reason.items()):
            logger.info(f"    {motivo}: {n}")
        total = total.merge(rep)
    return total.check_conservation()


def rejects_sidecar(path, rejects_dir) -> Path | None:
    """Caminho do arquivo lateral de rejeitos de ``path`` (ou ``None``)."""
    if rejects_dir is None:
        return None
    return Path(rejects_dir) / f"rejects_{Path(path).stem}.csv"


def file_digest(path) -> str:
    """SHA-256 do conteúdo do arquivo (hex)."""
    path = Path(path)
    h = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for bloco in iter(lambda: fh.read(1 << 20), b""):
                h.update(bloco)
    except OSError as exc:
        raise InputIOError(path, exc)
    return h.hexdigest()
