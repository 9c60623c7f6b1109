# -*- coding: utf-8 -*-
"""Fixtures compartilhadas: linhas brutas, registros, arquivos CSV e configs sintéticas."""

import csv
import json
import logging

import pytest

from src.config import DEFAULT_SCHEMA, SYNTH_START_EPOCH
from src.registro import ConnectionRecord

HORA = 3600
T0 = SYNTH_START_EPOCH


def linha_bruta(**campos) -> dict:
    """Mapa bruto mínimo válido, com sobrescritas por nome de coluna."""
    base = {
        "SourceIP": "192.0.2.10", "Port": "23", "Traffic": "tcp",
        "First": str(T0), "Last": str(T0 + 10), "Packets": "5", "Bytes": "200",
        "UniqueDests": "5", "UniqueDest24s": "1", "Lat": "", "Long": "",
        "Country": "US", "City": "", "ASN": "64500", "Org": "Example Net",
        "Prefix": "192.0.2.0/24", "RDNS": "", "Zmap": "0", "Masscan": "0",
        "Mirai": "0", "Samples": "1", "TCP": "1", "ICMP": "0", "TcpFlags": "S",
    }
    base.update(campos)
    return base


def registro(ip="192.0.2.10", port=23, packets=1, hora=0, **kw) -> ConnectionRecord:
    """Registro já validado na hora ``hora`` a partir de T0."""
    kw.setdefault("tcp", True)
    kw.setdefault("tcp_flags", "S")
    return ConnectionRecord(source_ip=ip, port=port, packets=packets,
                            first=T0 + hora * HORA, last=T0 + hora * HORA, **kw)


def escrever_csv(path, linhas, colunas=DEFAULT_SCHEMA):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(colunas)
        for l in linhas:
            w.writerow([l.get(c, "") for c in colunas])
    return path


def escrever_json(path, dados):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dados, fh)
    return path


@pytest.fixture
def csv_valido(tmp_path):
    """Arquivo com 6 linhas válidas: um scanner de 5 portas e ruído."""
    linhas = [linha_bruta(Port=str(p), Packets="10") for p in (23, 80, 445, 2323, 8080)]
    linhas.append(linha_bruta(SourceIP="198.51.100.7", Port="22", Packets="3",
                              Country="DE", ASN="64511", Org="Other Net",
                              Prefix="198.51.100.0/24"))
    return escrever_csv(tmp_path / "valido.csv", linhas)


@pytest.fixture
def csv_com_rejeitos(tmp_path):
    """4 linhas válidas e 2 inválidas (porta 0 e zero pacotes)."""
    linhas = [linha_bruta(Port=str(p)) for p in (23, 80, 443, 22)]
    linhas.append(linha_bruta(Port="0"))
    linhas.append(linha_bruta(Packets="0"))
    return escrever_csv(tmp_path / "rejeitos.csv", linhas)


@pytest.fixture
def config_pequena() -> dict:
    """Corpus sintético pequeno com todas as campanhas."""
    return {
        "seed": 7,
        "window_hours": 48,
        "campaigns": [
            {"kind": "persistent_scanner", "sources": 2, "ports": [23, 80, 445, 2323, 8080],
             "packets_per_hour": 50, "asn": 64501, "country": "US", "tool": "zmap"},
            {"kind": "bursty_spike", "sources": 1, "ports": [23], "spike_hour": 10,
             "spike_packets": 2000, "asn": 64502, "country": "BR"},
            {"kind": "coordinated_surge", "sources": 5, "port_diversity": 20,
             "spike_packets": 100, "tool": "masscan"},
            {"kind": "backscatter_victim", "sources": 4, "records_per_source": 3,
             "packets_per_record": 2},
            {"kind": "background_noise", "sources": 200, "records_per_source": 2,
             "pareto_alpha": 0.8, "volume_min": 2, "volume_max": 500, "asn_count": 10,
             "tool": "mirai"},
        ],
    }


@pytest.fixture(autouse=True)
def _log_silencioso(caplog):
    caplog.set_level(logging.WARNING)
