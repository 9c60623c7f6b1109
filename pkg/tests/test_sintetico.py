# -*- coding: utf-8 -*-
import json

import pytest

from src.config import SYNTH_DEMO_CONFIG, SYNTH_START_EPOCH
from src.deteccao import (
    BackscatterParcial, build_profiles, detect_backscatter, detect_scanners,
    label, tally_fingerprints,
)
from src.enriquecimento import lookup
from src.erros import ConfigError, InvalidConfigError
from src.ingestao import ingest_file
from src.metricas import (
    HourWindow, classify_burstiness, entropy_series, hour_bucket, lorenz_gini,
    percentile_table,
)
from src.sintetico import (
    GroundTruth, SynthConfig, evaluate_against_truth, generate,
    load_ground_truth, load_synth_config, snapshot_from_records, write_corpus,
    write_ground_truth,
)
from tests.conftest import escrever_json


def _janela(cfg: SynthConfig) -> HourWindow:
    h = hour_bucket(cfg.start_epoch)
    return HourWindow(h, h + cfg.window_hours - 1)


# ── configuração ─────────────────────────────────────────────────────────────

def test_semente_obrigatoria(config_pequena):
    del config_pequena["seed"]
    with pytest.raises(ConfigError):
        SynthConfig.from_dict(config_pequena)


@pytest.mark.parametrize("alteracao", [
    {"kind": "wormhole"},
    {"spike_hour": 48},
    {"sources": 0},
    {"ports": [23, 23]},
    {"country": "BRA"},
    {"tool": "nmap"},
    {"campo_inexistente": 1},
])
def test_campanha_invalida(config_pequena, alteracao):
    config_pequena["campaigns"][1].update(alteracao)
    with pytest.raises(InvalidConfigError):
        SynthConfig.from_dict(config_pequena)


def test_n_sources_inconsistente(config_pequena):
    config_pequena["n_sources"] = 5
    with pytest.raises(InvalidConfigError):
        SynthConfig.from_dict(config_pequena)


def test_alvo_sem_fundo_e_invalido(config_pequena):
    config_pequena["campaigns"] = config_pequena["campaigns"][:2]
    config_pequena["target_top1pct_share"] = 0.5
    with pytest.raises(InvalidConfigError):
        generate(SynthConfig.from_dict(config_pequena))


def test_semente_da_linha_de_comando_substitui(tmp_path, config_pequena):
    path = escrever_json(tmp_path / "cfg.json", config_pequena)
    assert load_synth_config(path).seed == 7
    assert load_synth_config(path, seed=99).seed == 99


# ── determinismo ─────────────────────────────────────────────────────────────

def test_mesma_semente_mesmo_corpus(config_pequena):
    cfg = SynthConfig.from_dict(config_pequena)
    a, ga = generate(cfg)
    b, gb = generate(cfg)
    assert a == b
    assert ga == gb


def test_sementes_diferentes_digests_diferentes(config_pequena, tmp_path):
    cfg_a = SynthConfig.from_dict(config_pequena)
    cfg_b = SynthConfig.from_dict({**config_pequena, "seed": 8})
    da = write_corpus(generate(cfg_a)[0], tmp_path / "a.csv")
    db = write_corpus(generate(cfg_b)[0], tmp_path / "b.csv")
    assert da != db


# ── formato e gabarito ───────────────────────────────────────────────────────

def test_corpus_ingere_sem_rejeicoes(config_pequena, tmp_path):
    registros, _ = generate(SynthConfig.from_dict(config_pequena))
    path = tmp_path / "corpus.csv"
    write_corpus(registros, path)
    relidos, rep = ingest_file(path)
    assert rep.rows_read == rep.rows_retained == len(registros)
    assert relidos == registros


def test_registros_dentro_da_janela_e_ordenados(config_pequena):
    cfg = SynthConfig.from_dict(config_pequena)
    registros, _ = generate(cfg)
    janela = _janela(cfg)
    assert all(janela.contains(hour_bucket(r.first)) for r in registros)
    assert all(hour_bucket(r.last) == hour_bucket(r.first) for r in registros)
    firsts = [r.first for r in registros]
    assert firsts == sorted(firsts)


def test_volumes_por_fonte_do_gabarito(config_pequena):
    registros, gabarito = generate(SynthConfig.from_dict(config_pequena))
    volumes = {}
    for r in registros:
        volumes[r.source_ip] = volumes.get(r.source_ip, 0) + r.packets
    assert volumes == gabarito.per_source_volume
    assert len(volumes) == sum(c["sources"] for c in config_pequena["campaigns"])


def test_gabarito_gravado_e_relido(config_pequena, tmp_path):
    cfg = SynthConfig.from_dict(config_pequena)
    registros, gabarito = generate(cfg)
    path = write_ground_truth(gabarito, cfg, tmp_path / "gt.json", "abc", len(registros))
    assert load_ground_truth(path) == gabarito
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["generator"] == {"algorithm": "numpy.random.PCG64", "seed": 7}
    assert doc["record_count"] == len(registros)
    assert SynthConfig.from_dict(doc["config"]) == cfg


def test_snapshot_cobre_todos_os_asns(config_pequena):
    registros, _ = generate(SynthConfig.from_dict(config_pequena))
    snap = snapshot_from_records(registros, "2025-01-09")
    for r in registros[::7]:
        info = lookup(snap, r.source_ip)
        assert (info.country, info.asn, info.org) == (r.country, r.asn, r.org)


# ── laços fechados ───────────────────────────────────────────────────────────

def test_scanners_e_backscatter_batem_com_o_gabarito(config_pequena):
    cfg = SynthConfig.from_dict(config_pequena)
    registros, gabarito = generate(cfg)
    perfis = build_profiles(registros)
    portas = {}
    for r in registros:
        portas.setdefault(r.source_ip, set()).add(r.port)
    assert detect_scanners(perfis) == frozenset(ip for ip, p in portas.items() if len(p) >= 5)
    assert detect_scanners(perfis) == gabarito.scanner_sources
    assert detect_backscatter(registros) == gabarito.backscatter_record_ids
    # 2 persistentes + 5 do surto
    assert len(gabarito.scanner_sources) == 7
    assert len(gabarito.backscatter_record_ids) == 4 * 3

    rotulos = label(perfis, BackscatterParcial.from_records(registros),
                    tally_fingerprints(registros))
    classes = classify_burstiness(registros, _janela(cfg), volume_threshold_high=1000)
    avaliacao = evaluate_against_truth(rotulos, classes, gabarito)
    for chave in ("scanners", "backscatter"):
        assert avaliacao[chave]["precision"] == 1.0
        assert avaliacao[chave]["recall"] == 1.0
    assert avaliacao["asn_misclassified"] == 0


def test_burstiness_plantada_com_limiares_padrao():
    cfg = SynthConfig.from_dict({
        "seed": 5,
        "campaigns": [
            {"kind": "persistent_scanner", "sources": 1, "ports": [23, 80, 445, 2323, 8080],
             "packets_per_hour": 5000, "asn": 64601},
            {"kind": "bursty_spike", "sources": 1, "ports": [23], "spike_hour": 100,
             "spike_packets": 6_000_000, "asn": 64602},
            {"kind": "background_noise", "sources": 100, "volume_min": 1,
             "volume_max": 1000, "asn_count": 5},
        ],
    })
    registros, gabarito = generate(cfg)
    classes = {b.asn: b for b in classify_burstiness(registros, _janela(cfg))}
    assert classes[64601].total_packets >= 1_000_000
    assert classes[64601].activity_ratio >= 0.5
    assert classes[64601].burst_class == "persistent_high"
    assert classes[64602].total_packets >= 5_000_000
    assert classes[64602].active_hours == 1
    assert classes[64602].burst_class == "bursty_high"
    assert gabarito.asn_class == {64601: "persistent_high", 64602: "bursty_high"}


def test_concentracao_calibrada():
    cfg = SynthConfig.from_dict({
        "seed": 81,
        "target_top1pct_share": 0.81,
        "campaigns": [
            {"kind": "background_noise", "sources": 5000, "records_per_source": 3,
             "pareto_alpha": 0.3, "volume_min": 1, "volume_max": 1_000_000,
             "asn_count": 50},
        ],
    })
    _, gabarito = generate(cfg)
    tabela = percentile_table(gabarito.per_source_volume, [0.01, 0.05, 0.10])
    assert 0.79 <= tabela.share_at(0.01) <= 0.83
    assert lorenz_gini(list(gabarito.per_source_volume.values())).gini >= 0.95


def test_surto_sincroniza_volume_e_entropia():
    cfg = SynthConfig.from_dict({
        "seed": 9,
        "campaigns": [
            {"kind": "persistent_scanner", "sources": 1, "ports": [23, 80, 445, 2323, 8080],
             "packets_per_hour": 5000, "asn": 64701},
            {"kind": "background_noise", "sources": 300, "pareto_alpha": 0.8,
             "volume_min": 1, "volume_max": 1000, "asn_count": 10},
            {"kind": "coordinated_surge", "sources": 40, "port_diversity": 200,
             "spike_packets": 50_000},
        ],
    })
    registros, _ = generate(cfg)
    serie = entropy_series(registros, _janela(cfg))
    final = _janela(cfg).end
    assert serie.peak_hour("total_packets") == final
    assert serie.peak_hour("norm_port_entropy") == final
    assert serie.peak_hour("norm_asn_entropy") == final


def test_configuracao_de_demonstracao():
    cfg = load_synth_config(SYNTH_DEMO_CONFIG)
    assert cfg.start_epoch == SYNTH_START_EPOCH
    registros, gabarito = generate(cfg)
    tabela = percentile_table(gabarito.per_source_volume, [0.01])
    assert abs(tabela.share_at(0.01) - 0.81) <= 0.02
    assert gabarito.asn_class == {64501: "persistent_high", 64502: "bursty_high"}
    classes = {b.asn: b.burst_class for b in classify_burstiness(registros, _janela(cfg))}
    assert classes[64501] == "persistent_high"
    assert classes[64502] == "bursty_high"


def test_gabarito_from_dict_tolerante_a_chaves_extras():
    g = GroundTruth.from_dict({"scanner_sources": ["10.0.0.1"], "generator": {}})
    assert g.scanner_sources == frozenset({"10.0.0.1"})
    assert g.backscatter_record_ids == frozenset()
