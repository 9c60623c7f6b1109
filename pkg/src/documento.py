# -*- coding: utf-8 -*-
"""
Blocos de montagem de documentos Word usados pelas duas saídas .docx:
``relatorio.write_docx`` (a partir de um report.json) e ``csv_para_word``
(a partir de uma pasta com o pacote CSV).
"""

from dataclasses import dataclass
from datetime import datetime

import pandas as pd
from docx.document import Document as DocumentoWord
from docx.enum.table import WD_TABLE_ALIGNMENT
from docx.enum.text import WD_ALIGN_PARAGRAPH
from docx.oxml import OxmlElement
from docx.oxml.ns import qn
from docx.shared import Cm, Pt, RGBColor

AZUL = RGBColor(0x1A, 0x23, 0x7E)
BRANCO = RGBColor(0xFF, 0xFF, 0xFF)


@dataclass(frozen=True)
class EstiloTabela:
    """Cores (hex sem #) e tamanhos de fonte de uma tabela."""
    fundo_cabecalho: str = "1A237E"
    linha_par: str = "E8EAF6"
    linha_impar: str = "FFFFFF"
    fonte_cabecalho: int = 9
    fonte_corpo: int = 8


ESTILO_PADRAO = EstiloTabela()


def preparar(doc: DocumentoWord, margem_cm: float = 2.5, fonte: str = "Calibri") -> DocumentoWord:
    for secao in doc.sections:
        secao.top_margin = secao.bottom_margin = Cm(margem_cm)
        secao.left_margin = secao.right_margin = Cm(margem_cm)
    normal = doc.styles["Normal"]
    normal.font.name = fonte
    normal.font.size = Pt(11)
    return doc


def titulo(doc: DocumentoWord, texto: str, nivel: int = 1):
    h = doc.add_heading(texto, level=nivel)
    for run in h.runs:
        run.font.color.rgb = AZUL
    return h


def nota(doc: DocumentoWord, texto: str, tamanho: int = 9, italico: bool = True):
    p = doc.add_paragraph()
    run = p.add_run(texto)
    run.italic = italico
    run.font.size = Pt(tamanho)
    p.paragraph_format.space_after = Pt(6)
    return p


def _sombrear(celula, cor: str) -> None:
    shd = OxmlElement("w:shd")
    for atributo, valor in (("w:val", "clear"), ("w:color", "auto"), ("w:fill", cor)):
        shd.set(qn(atributo), valor)
    celula._tc.get_or_add_tcPr().append(shd)


def _escrever(celula, texto: str, tamanho: int, negrito: bool = False,
              cor: RGBColor | None = None) -> None:
    celula.text = texto
    for par in celula.paragraphs:
        for run in par.runs:
            run.bold = negrito
            run.font.size = Pt(tamanho)
            if cor is not None:
                run.font.color.rgb = cor


def tabela(doc: DocumentoWord, df: pd.DataFrame, max_linhas: int,
           estilo: EstiloTabela = ESTILO_PADRAO) -> bool:
    """
    Insere ``df`` como tabela com cabeçalho escuro e linhas zebradas.
    DataFrame vazio vira uma nota. Devolve True quando a tabela foi truncada.
    """
    if df.empty:
        nota(doc, "(Tabela vazia.)", tamanho=11)
        return False
    recorte = df.head(max_linhas)
    t = doc.add_table(rows=1, cols=len(recorte.columns), style="Table Grid")
    t.alignment = WD_TABLE_ALIGNMENT.CENTER
    for celula, coluna in zip(t.rows[0].cells, recorte.columns):
        _escrever(celula, str(coluna), estilo.fonte_cabecalho, negrito=True, cor=BRANCO)
        _sombrear(celula, estilo.fundo_cabecalho)
        celula.paragraphs[0].alignment = WD_ALIGN_PARAGRAPH.CENTER
    for n, linha in enumerate(recorte.itertuples(index=False)):
        cor = estilo.linha_par if n % 2 == 0 else estilo.linha_impar
        for celula, valor in zip(t.add_row().cells, linha):
            _escrever(celula, "" if pd.isna(valor) else str(valor), estilo.fonte_corpo)
            _sombrear(celula, cor)
    truncada = len(df) > max_linhas
    if truncada:
        nota(doc, f"* Tabela limitada a {max_linhas} linhas.")
    return truncada


def capa(doc: DocumentoWord, texto: str, subtitulo: str = "") -> None:
    """Página de rosto centralizada com data de geração."""
    for _ in range(5):
        doc.add_paragraph()
    linhas = [(texto, 20, True, False, AZUL)]
    if subtitulo:
        linhas.append((subtitulo, 13, False, True, None))
    for conteudo, tamanho, negrito, italico, cor in linhas:
        p = doc.add_paragraph()
        p.alignment = WD_ALIGN_PARAGRAPH.CENTER
        run = p.add_run(conteudo)
        run.bold, run.italic = negrito, italico
        run.font.size = Pt(tamanho)
        if cor is not None:
            run.font.color.rgb = cor
    for _ in range(6):
        doc.add_paragraph()
    data = doc.add_paragraph()
    data.alignment = WD_ALIGN_PARAGRAPH.CENTER
    data.add_run(f"Gerado em: {datetime.now().strftime('%d/%m/%Y %H:%M')}").font.size = Pt(11)
    doc.add_page_break()
