# -*- coding: utf-8 -*-
"""
Telescópio: Caracterização de Tráfego Não Solicitado em Telescópios de Rede
========================================================================
Pacote principal: análise de registros de conexão agregados capturados por
um telescópio de rede (darknet).

Módulos:
    config          — Configurações centralizadas do projeto
    erros           — Exceções e códigos de saída
    registro        — Registro de conexão, validação de linhas e resumo
    ingestao        — Fase 1: carga e limpeza em lotes
    enriquecimento  — Fase 2: país/ASN/org por maior prefixo (snapshot offline)
    deteccao        — Fase 3: scanners, backscatter e impressões digitais
    metricas        — Fase 4: Lorenz/Gini, percentis, entropia, burstiness
    relatorio       — Fase 5: relatório JSON/CSV/Word e séries para gráfico
    sintetico       — Corpus sintético com gabarito
    pipeline        — Subcomandos analyze / synth / validate / report-convert
"""

__version__ = "1.0.0"
