# -*- coding: utf-8 -*-
"""
csv_para_word.py
────────────────
Converte o pacote de CSVs gravado por ``analyze --format csv`` para tabelas
formatadas em Word (.docx).

Modos de uso:
  1. Um único documento com todas as tabelas (padrão):
       python csv_para_word.py --pasta resultados/

  2. Um documento Word por CSV:
       python csv_para_word.py --pasta resultados/ --separados

  3. Converter apenas um CSV específico:
       python csv_para_word.py --arquivo resultados/top_ports.csv
"""

import argparse
import sys
from pathlib import Path

import pandas as pd
from docx import Document

ROOT_DIR = Path(__file__).resolve().parent
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

from src import documento
from src.config import (
    CSV_BUNDLE_EXTRA, CSV_BUNDLE_FILES, DOCX_MAX_LINHAS, RESULTS_DIR,
    SUBTITULO_PROJETO, TITULO_PROJETO,
)
from src.relatorio import TITULOS_TABELAS

# pacote do relatório primeiro, depois quaisquer outros CSVs
ORDEM = list(CSV_BUNDLE_FILES) + list(CSV_BUNDLE_EXTRA)


def _titulo_amigavel(nome_arquivo: str) -> str:
    if nome_arquivo in TITULOS_TABELAS:
        return TITULOS_TABELAS[nome_arquivo]
    return nome_arquivo.replace(".csv", "").replace("_", " ").title()


def _novo_documento(titulo: str):
    doc = documento.preparar(Document())
    documento.capa(doc, titulo, SUBTITULO_PROJETO)
    return doc


def _secao_csv(doc, csv_path: Path) -> None:
    documento.nota(doc, f"Arquivo de origem: {csv_path.name}")
    try:
        df = pd.read_csv(csv_path, encoding="utf-8", keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        documento.nota(doc, f"[Erro ao ler arquivo: {exc}]", tamanho=11)
        return
    documento.nota(doc, f"{len(df)} linha(s) × {len(df.columns)} coluna(s)")
    documento.tabela(doc, df, DOCX_MAX_LINHAS)


# ════════════════════════════════════════════════════════════════════════════
# DOCUMENTO ÚNICO / DOCUMENTOS SEPARADOS
# ════════════════════════════════════════════════════════════════════════════

def gerar_documento_unico(csvs: list[Path], saida_dir: Path) -> Path:
    """Gera um único .docx com índice e todas as tabelas do pacote."""
    doc = _novo_documento(TITULO_PROJETO)
    titulos = [_titulo_amigavel(p.name) for p in csvs]

    documento.titulo(doc, "ÍNDICE DE TABELAS", 1)
    for i, titulo in enumerate(titulos, 1):
        doc.add_paragraph(f"{i}. {titulo}")
    doc.add_page_break()

    for i, (csv_path, titulo) in enumerate(zip(csvs, titulos), 1):
        print(f"  [{i}/{len(csvs)}] {titulo} ← {csv_path.name}")
        documento.titulo(doc, f"Tabela {i}: {titulo}", 1)
        _secao_csv(doc, csv_path)
        doc.add_page_break()

    saida_dir.mkdir(parents=True, exist_ok=True)
    nome_saida = saida_dir / "tabelas.docx"
    doc.save(str(nome_saida))
    return nome_saida


def gerar_documentos_separados(csvs: list[Path], saida_dir: Path) -> list[Path]:
    saida_dir.mkdir(parents=True, exist_ok=True)
    saidas = []
    for csv_path in csvs:
        titulo = _titulo_amigavel(csv_path.name)
        print(f"  → {titulo}")
        doc = _novo_documento(titulo)
        documento.titulo(doc, titulo, 1)
        _secao_csv(doc, csv_path)
        saidas.append(saida_dir / f"{csv_path.stem}.docx")
        doc.save(str(saidas[-1]))
    return saidas


# ════════════════════════════════════════════════════════════════════════════
# PONTO DE ENTRADA
# ════════════════════════════════════════════════════════════════════════════

def _coletar_csvs(pasta: Path) -> list[Path]:
    """CSVs da pasta na ordem do pacote do relatório, depois os restantes."""
    todos = {p.name: p for p in sorted(pasta.glob("*.csv"))}
    ordenados = [todos.pop(nome) for nome in ORDEM if nome in todos]
    ordenados += sorted(todos.values(), key=lambda p: p.name)
    return ordenados


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Converte o pacote CSV do relatório para Word.")
    parser.add_argument("--pasta", type=Path, default=RESULTS_DIR,
                        help="Pasta com o pacote CSV (padrão: resultados/).")
    parser.add_argument("--saida", type=Path, default=None,
                        help="Pasta de saída dos .docx (padrão: <pasta>/word).")
    parser.add_argument("--separados", action="store_true",
                        help="Gera um Word por CSV.")
    parser.add_argument("--arquivo", type=Path, default=None,
                        help="Caminho para um único CSV a converter.")
    args = parser.parse_args(argv)

    print("=" * 60)
    print("  CONVERSOR CSV → WORD")
    print("=" * 60)

    if args.arquivo:
        if not args.arquivo.exists():
            print(f"ERRO: arquivo não encontrado: {args.arquivo}")
            return 3
        csvs = [args.arquivo]
        saida_dir = args.saida or args.arquivo.parent / "word"
    else:
        csvs = _coletar_csvs(args.pasta)
        saida_dir = args.saida or args.pasta / "word"
        if not csvs:
            print(f"Nenhum CSV encontrado em: {args.pasta}")
            return 0

    print(f"\nCSVs encontrados: {len(csvs)}")
    if args.separados or args.arquivo:
        saidas = gerar_documentos_separados(csvs, saida_dir)
        print(f"\n✔ {len(saidas)} arquivo(s) Word gerado(s) em {saida_dir}")
    else:
        saida = gerar_documento_unico(csvs, saida_dir)
        print(f"\n✔ Documento único gerado: {saida}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
