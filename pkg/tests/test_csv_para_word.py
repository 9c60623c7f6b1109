# -*- coding: utf-8 -*-
import pytest
from docx import Document

import csv_para_word
from src.pipeline import cmd_analyze, resolve_run_config


@pytest.fixture
def pacote(csv_valido, tmp_path):
    out = tmp_path / "pacote"
    cmd_analyze(resolve_run_config({"inputs": [str(csv_valido)], "out": str(out),
                                    "format": "csv"}, env={}))
    (out / "extra.csv").write_text("a,b\n1,2\n", encoding="utf-8")
    return out


def test_ordem_do_pacote_e_depois_os_demais(pacote):
    nomes = [p.name for p in csv_para_word._coletar_csvs(pacote)]
    assert nomes[:3] == ["summary.csv", "cleaning.csv", "percentile_table.csv"]
    assert nomes[-1] == "extra.csv"
    assert nomes.index("fingerprints.csv") < nomes.index("extra.csv")


def test_documento_unico(pacote, capsys):
    assert csv_para_word.main(["--pasta", str(pacote)]) == 0
    doc = Document(str(pacote / "word" / "tabelas.docx"))
    assert len(doc.tables) == len(csv_para_word._coletar_csvs(pacote))
    assert "Documento único gerado" in capsys.readouterr().out


def test_documentos_separados(pacote, tmp_path):
    saida = tmp_path / "docs"
    assert csv_para_word.main(["--pasta", str(pacote), "--saida", str(saida),
                               "--separados"]) == 0
    assert (saida / "top_ports.docx").exists()
    assert (saida / "extra.docx").exists()


def test_arquivo_inexistente(tmp_path):
    assert csv_para_word.main(["--arquivo", str(tmp_path / "nada.csv")]) == 3


def test_pasta_sem_csv(tmp_path):
    assert csv_para_word.main(["--pasta", str(tmp_path)]) == 0
    assert not (tmp_path / "word").exists()
