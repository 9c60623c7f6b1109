#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Pipeline Principal — Telescópio: caracterização de tráfego não solicitado

Subcomandos (cada fase pode rodar sozinha):
  analyze         carga → limpeza → enriquecimento → detecção → métricas → relatório
  synth           gera corpus sintético + gabarito + snapshot de enriquecimento
  validate        só carga e limpeza; imprime o relatório de limpeza (JSON)
  report-convert  converte um report.json para pacote CSV ou Word

Uso:
    python pipeline_principal.py synth --out dados/sinteticos
    python pipeline_principal.py analyze --input dados/sinteticos/corpus.csv \\
        --snapshot dados/sinteticos/snapshot.csv --truth dados/sinteticos/ground_truth.json
    python pipeline_principal.py analyze --input a.csv b.csv --format csv --word
    python pipeline_principal.py validate --input dados/corpus.csv
    python pipeline_principal.py report-convert --report resultados/report.json --format docx

Códigos de saída: 0 sucesso · 1 configuração/uso · 2 formato de entrada · 3 E/S
"""

import argparse
import importlib.util
import logging
import sys
import time
from datetime import datetime
from pathlib import Path

# garante que a raiz do projeto está no sys.path
ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from src.config import (
    CHUNK_SIZE, ENTROPY_WEIGHTS, LOG_DIR, REPORT_FORMATS, TITULO_PROJETO,
    garantir_diretorios,
)
from src.erros import ConfigError, ErroTelescopio


class _Parser(argparse.ArgumentParser):
    """Erros de uso saem com código 1 (argparse usa 2, reservado a formato)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ConfigError.exit_code, f"{self.prog}: erro: {message}\n")


def _configurar_log(verbose: bool = False, arquivo: bool = True):
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stdout)]
    if arquivo:
        garantir_diretorios(LOG_DIR)
        ts = datetime.now().strftime("%Y%m%d_%H%M%S")
        handlers.append(logging.FileHandler(str(LOG_DIR / f"pipeline_{ts}.log"), encoding="utf-8"))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s [%(levelname)s] %(name)s — %(message)s",
        handlers=handlers,
        force=True,
    )
    return logging.getLogger("pipeline")


def _construir_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pipeline_principal.py", description=TITULO_PROJETO)
    parser.add_argument("-v", "--verbose", action="store_true", help="Log em nível DEBUG.")
    parser.add_argument("--sem-log-arquivo", action="store_true",
                        help="Não grava log em logs/.")
    parser.add_argument("--sem-progresso", action="store_true",
                        help="Desativa as barras de progresso.")
    sub = parser.add_subparsers(dest="comando", required=True, parser_class=_Parser)

    # ── analyze ─────────────────────────────────────────────────────────────
    a = sub.add_parser("analyze", help="Análise completa de um ou mais arquivos.")
    a.add_argument("--input", dest="inputs", nargs="+", default=None,
                   help="Arquivo(s) CSV de registros de conexão.")
    a.add_argument("--config", type=Path, default=None,
                   help="Arquivo JSON com a configuração da execução.")
    a.add_argument("--snapshot", default=None,
                   help="Snapshot prefixo→país/ASN/org (ou variável TELESCOPIO_SNAPSHOT).")
    a.add_argument("--enrich-policy", choices=("fill", "override"), default=None)
    a.add_argument("--scan-threshold", type=int, default=None,
                   help="Mínimo de portas distintas para rotular scanner (padrão 5).")
    a.add_argument("--burst-volume", type=int, default=None,
                   help="Volume a partir do qual o ASN é de alto volume.")
    a.add_argument("--burst-activity", type=float, default=None,
                   help="Fração de horas ativas a partir da qual o ASN é persistente.")
    a.add_argument("--percentiles", default=None,
                   help='Lista de percentis, ex.: "0.01,0.05,0.10" ou "1%%,5%%,10%%".')
    a.add_argument("--risk-registry", default=None,
                   help="CSV Port,Label,Risk com portas de alto/baixo risco.")
    a.add_argument("--out", default=None, help="Diretório de saída (padrão: resultados/).")
    a.add_argument("--format", choices=REPORT_FORMATS, default=None)
    a.add_argument("--entropy-weight", choices=ENTROPY_WEIGHTS, default=None)
    a.add_argument("--chunk-size", type=int, default=None,
                   help=f"Linhas por lote de leitura (padrão {CHUNK_SIZE}).")
    a.add_argument("--workers", type=int, default=None, help="Lotes processados em paralelo.")
    a.add_argument("--spool-rejects", action="store_true", default=None,
                   help="Grava as linhas rejeitadas em rejects_<arquivo>.csv.")
    a.add_argument("--truth", default=None,
                   help="Gabarito ground_truth.json para avaliar as heurísticas.")
    a.add_argument("--word", action="store_true",
                   help="Com --format csv, converte o pacote para Word ao final.")

    # ── synth ───────────────────────────────────────────────────────────────
    s = sub.add_parser("synth", help="Gera corpus sintético com gabarito.")
    s.add_argument("--config", type=Path, default=None,
                   help="Configuração JSON do corpus (padrão: configuracoes/demo_sintetico.json).")
    s.add_argument("--seed", type=int, default=None, help="Sobrepõe a semente do arquivo.")
    s.add_argument("--out", type=Path, default=None, help="Diretório de saída.")

    # ── validate ────────────────────────────────────────────────────────────
    v = sub.add_parser("validate", help="Só carga e limpeza.")
    v.add_argument("--input", dest="inputs", nargs="+", required=True)
    v.add_argument("--chunk-size", type=int, default=CHUNK_SIZE)
    v.add_argument("--rejects-dir", type=Path, default=None,
                   help="Grava as linhas rejeitadas neste diretório.")

    # ── report-convert ──────────────────────────────────────────────────────
    r = sub.add_parser("report-convert", help="Converte report.json para CSV ou Word.")
    r.add_argument("--report", type=Path, required=True)
    r.add_argument("--format", choices=REPORT_FORMATS + ("docx",), required=True)
    r.add_argument("--out", type=Path, default=None,
                   help="Diretório de saída (padrão: pasta do relatório).")
    return parser


def _flags_analyze(args) -> dict:
    nomes = ("inputs", "snapshot", "enrich_policy", "scan_threshold", "burst_volume",
             "burst_activity", "percentiles", "risk_registry", "out", "format",
             "entropy_weight", "chunk_size", "workers", "spool_rejects", "truth")
    return {n: getattr(args, n) for n in nomes}


def _converter_para_word(pasta: Path, logger) -> None:
    spec = importlib.util.spec_from_file_location("csv_para_word", ROOT / "csv_para_word.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    csvs = mod._coletar_csvs(pasta)
    if csvs:
        saida = mod.gerar_documento_unico(csvs, pasta / "word")
        logger.info(f"  → Tabelas Word: {saida}")
    else:
        logger.warning(f"  → Nenhum CSV encontrado em {pasta}")


def _executar(args, logger) -> int:
    progresso = not args.sem_progresso

    if args.comando == "analyze":
        logger.info("▶ ANALYZE")
        from src.pipeline import cmd_analyze, resolve_run_config
        cfg = resolve_run_config(_flags_analyze(args), args.config)
        status, _ = cmd_analyze(cfg, progresso)
        if args.word:
            if cfg.format != "csv":
                logger.warning("  --word requer --format csv; conversão ignorada")
            else:
                _converter_para_word(Path(cfg.out), logger)
        return status

    if args.comando == "synth":
        logger.info("▶ SYNTH")
        from src.pipeline import cmd_synth
        saidas = cmd_synth(args.config, args.out, args.seed, progresso)
        logger.info(f"  → Corpus: {saidas['corpus']} ({saidas['records']} registros)")
        logger.info(f"  → Gabarito: {saidas['ground_truth']}")
        return 0

    if args.comando == "validate":
        logger.info("▶ VALIDATE")
        from src.pipeline import cmd_validate
        cmd_validate(args.inputs, args.chunk_size, args.rejects_dir, progresso)
        return 0

    logger.info("▶ REPORT-CONVERT")
    from src.pipeline import cmd_report_convert
    out = args.out or args.report.parent
    for saida in cmd_report_convert(args.report, args.format, out):
        logger.info(f"  → {saida}")
    return 0


def main(argv=None) -> int:
    args = _construir_parser().parse_args(argv)
    logger = _configurar_log(args.verbose, not args.sem_log_arquivo)
    logger.info("=" * 70)
    logger.info(f"PIPELINE — {TITULO_PROJETO}")
    logger.info(f"Subcomando: {args.comando}")
    logger.info("=" * 70)
    t0 = time.time()

    try:
        status = _executar(args, logger)
    except ErroTelescopio as exc:
        logger.error(f"✗ {type(exc).__name__}: {exc}")
        return exc.exit_code

    elapsed = time.time() - t0
    logger.info("=" * 70)
    logger.info(f"PIPELINE CONCLUÍDO em {elapsed:.1f} s")
    logger.info("=" * 70)
    return status


if __name__ == "__main__":
    sys.exit(main())
