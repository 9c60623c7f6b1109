# -*- coding: utf-8 -*-
import pytest

from src.registro import (
    ConnectionRecord, RejectReason, TimestampFormat, detect_timestamp_format,
    parse_timestamp, record_to_row, summarize, validate_record,
)
from tests.conftest import T0, linha_bruta, registro


# ── validate_record ──────────────────────────────────────────────────────────

def test_linha_valida_vira_registro():
    rec = validate_record(linha_bruta())
    assert isinstance(rec, ConnectionRecord)
    assert rec.source_ip == "192.0.2.10"
    assert rec.port == 23
    assert rec.packets == 5
    assert rec.first == T0 and rec.last == T0 + 10
    assert rec.asn == 64500 and rec.country == "US"
    assert rec.tcp_flags == "S"
    assert rec.protocol == "tcp"


@pytest.mark.parametrize("coluna", ["SourceIP", "Port", "Packets"])
@pytest.mark.parametrize("nulo", ["", "NULL", "null", "NaN"])
def test_campo_critico_nulo(coluna, nulo):
    assert validate_record(linha_bruta(**{coluna: nulo})) is RejectReason.NULL_CRITICAL_FIELD


@pytest.mark.parametrize("porta", ["0", "65536", "-1"])
def test_porta_invalida(porta):
    # "-1" converte para inteiro, então cai na faixa e não no malformado
    assert validate_record(linha_bruta(Port=porta)) is RejectReason.INVALID_PORT


def test_limites_de_porta_aceitos():
    assert validate_record(linha_bruta(Port="1")).port == 1
    assert validate_record(linha_bruta(Port="65535")).port == 65535


def test_zero_pacotes():
    assert validate_record(linha_bruta(Packets="0")) is RejectReason.ZERO_PACKETS


@pytest.mark.parametrize("campos", [
    {"SourceIP": "300.1.1.1"},
    {"SourceIP": "2001:db8::1"},
    {"Packets": "abc"},
    {"Packets": "-3"},
    {"First": str(T0 + 100), "Last": str(T0)},
    {"UniqueDests": "1", "UniqueDest24s": "2"},
    {"Country": "USA"},
    {"Lat": "91"},
    {"Zmap": "talvez"},
    {"Prefix": "10.0.0.0/40"},
])
def test_campo_malformado(campos):
    assert validate_record(linha_bruta(**campos)) is RejectReason.MALFORMED_FIELD


@pytest.mark.parametrize("flags", ["SX", "SXZ", "A?"])
def test_flags_desconhecidas_mantem_o_registro(flags):
    rec = validate_record(linha_bruta(TcpFlags=flags, Packets="7"))
    assert not isinstance(rec, RejectReason)
    assert rec.packets == 7
    assert rec.tcp_flags is None
    assert summarize([rec]).total_packets == 7


def test_linha_estruturalmente_invalida():
    assert validate_record({"__malformed__": "1"}) is RejectReason.MALFORMED_FIELD


def test_desconhecidos_explicitos():
    rec = validate_record(linha_bruta(Country="", ASN="", Org=""))
    assert (rec.country, rec.asn, rec.org) == ("??", 0, "")


def test_asn_com_prefixo_as():
    assert validate_record(linha_bruta(ASN="AS13335")).asn == 13335


def test_first_last_ausentes():
    rec = validate_record(linha_bruta(First="", Last=""))
    assert rec.first == 0 and rec.last == 0
    rec = validate_record(linha_bruta(Last=""))
    assert rec.last == rec.first == T0


def test_flags_vazias_e_ausentes():
    assert validate_record(linha_bruta(TcpFlags="-")).tcp_flags == ""
    assert validate_record(linha_bruta(TcpFlags="")).tcp_flags is None
    assert validate_record(linha_bruta(TcpFlags="sae")).tcp_flags == "SAE"


def test_protocolo_tcp_vence_icmp():
    rec = validate_record(linha_bruta(TCP="1", ICMP="1"))
    assert rec.protocol == "tcp"
    rec = validate_record(linha_bruta(TCP="0", ICMP="1"))
    assert rec.protocol == "icmp"


# ── carimbos de tempo ────────────────────────────────────────────────────────

def test_deteccao_de_formato():
    assert detect_timestamp_format("1736380800") is TimestampFormat.EPOCH
    assert detect_timestamp_format("2025-01-09T00:00:00Z") is TimestampFormat.ISO
    assert detect_timestamp_format("") is None


def test_iso_e_epoch_equivalentes():
    assert parse_timestamp("2025-01-09T00:00:00Z") == T0
    assert parse_timestamp("2025-01-09T00:00:00") == T0
    assert parse_timestamp("1736380800.9") == T0


def test_formato_misto_no_arquivo_e_malformado():
    raw = linha_bruta(First="2025-01-09T00:00:00Z", Last="2025-01-09T00:00:10Z")
    assert validate_record(raw, TimestampFormat.EPOCH) is RejectReason.MALFORMED_FIELD
    assert isinstance(validate_record(raw, TimestampFormat.ISO), ConnectionRecord)


# ── serialização e resumo ────────────────────────────────────────────────────

def test_record_to_row_revalida_igual():
    rec = validate_record(linha_bruta(TcpFlags="-", Lat="-23.5", Long="-46.6"))
    assert validate_record(record_to_row(rec)) == rec


def test_summarize_contagens_exatas():
    regs = [
        registro(ip="192.0.2.1", port=23, packets=3, hora=0, asn=1),
        registro(ip="192.0.2.1", port=80, packets=2, hora=5, asn=1),
        registro(ip="192.0.2.2", port=23, packets=10, hora=2, asn=2),
    ]
    s = summarize(regs)
    assert s.record_count == 3
    assert s.total_packets == 15
    assert s.unique_source_ips == 2
    assert s.unique_ports == 2
    assert s.unique_asns == 2
    assert s.time_span == (T0, T0 + 5 * 3600)
    assert summarize(reversed(regs)) == s


def test_summarize_vazio():
    s = summarize([])
    assert s.record_count == 0 and s.time_span is None
