# -*- coding: utf-8 -*-
"""
Configurações centralizadas do projeto.
Título: Telescópio — Caracterização de Tráfego Não Solicitado em
        Telescópios de Rede (darknets).
Todos os caminhos, parâmetros e constantes ficam aqui.
"""

from pathlib import Path

# ==============================================================================
# METADADOS DO PROJETO
# ==============================================================================

TITULO_PROJETO = (
    "Telescópio: Caracterização de Tráfego Não Solicitado "
    "em Telescópios de Rede"
)
SUBTITULO_PROJETO = (
    "Heurísticas comportamentais, concentração, entropia e burstiness "
    "sobre registros de conexão agregados"
)

# ==============================================================================
# CAMINHOS
# ==============================================================================

ROOT_DIR     = Path(__file__).resolve().parent.parent
DATA_DIR     = ROOT_DIR / "dados"
SYNTH_DIR    = DATA_DIR / "sinteticos"
RESULTS_DIR  = ROOT_DIR / "resultados"
LOG_DIR      = ROOT_DIR / "logs"


def garantir_diretorios(*dirs: Path) -> None:
    """Cria os diretórios informados (ou os padrões do projeto)."""
    for d in dirs or (DATA_DIR, SYNTH_DIR, RESULTS_DIR, LOG_DIR):
        Path(d).mkdir(parents=True, exist_ok=True)


# Variável de ambiente com o snapshot padrão de enriquecimento
ENV_SNAPSHOT = "TELESCOPIO_SNAPSHOT"

# ==============================================================================
# ESQUEMA DOS REGISTROS (Tabela de campos por registro)
# ==============================================================================

CRITICAL_COLUMNS = ("SourceIP", "Port", "Packets")

TABLE_COLUMNS = (
    "SourceIP", "Port", "Traffic", "First", "Last", "Packets", "Bytes",
    "UniqueDests", "UniqueDest24s", "Lat", "Long", "Country", "City", "ASN",
    "Org", "Prefix", "RDNS", "Zmap", "Masscan", "Mirai", "Samples", "TCP",
    "ICMP",
)
# coluna de extensão (não consta no export original)
EXTRA_COLUMNS = ("TcpFlags",)
DEFAULT_SCHEMA = TABLE_COLUMNS + EXTRA_COLUMNS

REJECT_COLUMN = "RejectReason"

# Valores aceitos nas colunas booleanas
BOOL_TRUE  = frozenset({"1", "true", "TRUE", "True"})
BOOL_FALSE = frozenset({"0", "false", "FALSE", "False"})
# Marcadores de nulo em campos críticos
NULL_MARKERS = frozenset({"", "NULL", "null", "None", "NaN", "nan", "NA"})

# Marcadores explícitos de "desconhecido"
UNKNOWN_COUNTRY = "??"
UNKNOWN_ASN     = 0
UNKNOWN_ORG     = ""

# ==============================================================================
# PARÂMETROS DE INGESTÃO
# ==============================================================================

CHUNK_SIZE = 100_000        # linhas por lote
CSV_ENCODING = "utf-8"

# ==============================================================================
# PARÂMETROS DAS HEURÍSTICAS (detecção)
# ==============================================================================

SCAN_THRESHOLD = 5          # portas distintas para sinalizar scanner

# Tabela de decisão de backscatter: combinações de flags TCP tratadas como
# resposta de vítima (SYN-ACK, RST-ACK, RST, ACK). Bits ECN (E, C) são
# descartados antes da consulta.
BACKSCATTER_FLAGS = (
    frozenset("SA"),
    frozenset("RA"),
    frozenset("R"),
    frozenset("A"),
)
TCP_FLAG_ALPHABET = frozenset("SARFPU")
ECN_FLAGS = frozenset("EC")

FINGERPRINT_TOOLS = ("zmap", "masscan", "mirai")

# ==============================================================================
# PARÂMETROS ESTATÍSTICOS (métricas)
# ==============================================================================

SECONDS_PER_HOUR = 3600

PERCENTILES = (0.01, 0.05, 0.10)

BURST_VOLUME_HIGH   = 1_000_000    # pacotes
BURST_ACTIVITY_HIGH = 0.5          # fração de horas ativas na janela

ENTROPY_WEIGHTS = ("packets", "records")
ENTROPY_WEIGHT  = "packets"

# soma compensada acima deste tamanho
FSUM_THRESHOLD = 100_000

TOP_COUNTRIES   = 10
TOP_ASNS        = 10
TOP_PORTS       = 10
TOP_ASN_SERIES  = 5

BURSTINESS_CLASSES = (
    "persistent_high", "bursty_high", "episodic_minor", "background",
)

# ==============================================================================
# PORTAS DE ALTO RISCO (comparação alto × baixo risco)
# ==============================================================================

HIGH_RISK_PORTS = {
    8080:  "HTTP Alt",
    23:    "Telnet",
    80:    "HTTP",
    445:   "SMB",
    2323:  "Telnet Alt",
    8443:  "HTTPS Alt",
    53:    "DNS",
    81:    "Hosts2-ns",
    443:   "HTTPS",
    5555:  "ADB",
    56766: "unlabeled",
}
LOW_RISK_QUARTILE = 0.25

# ==============================================================================
# RELATÓRIO
# ==============================================================================

REPORT_FORMATS = ("json", "csv")
REPORT_JSON_NAME = "report.json"

CSV_BUNDLE_FILES = (
    "summary.csv", "cleaning.csv", "percentile_table.csv",
    "entropy_series.csv", "burstiness.csv", "top_countries.csv",
    "top_asns.csv", "top_ports.csv", "port_risk.csv", "lorenz.csv",
)

PLOT_SERIES = (
    "hourly_volume_by_asn_topN", "entropy_raw", "entropy_normalized",
    "lorenz", "top_countries", "port_risk",
)

# ==============================================================================
# CORPUS SINTÉTICO
# ==============================================================================

SYNTH_ALGORITHM    = "numpy.random.PCG64"
SYNTH_START_EPOCH  = 1_736_380_800     # 2025-01-09T00:00:00Z
SYNTH_WINDOW_HOURS = 240               # 10 dias
SYNTH_CORPUS_NAME  = "corpus.csv"
SYNTH_TRUTH_NAME   = "ground_truth.json"
SYNTH_SNAPSHOT_NAME = "snapshot.csv"

CAMPAIGN_KINDS = (
    "persistent_scanner", "bursty_spike", "coordinated_surge",
    "backscatter_victim", "background_noise",
)

# portas populares sorteadas pelo ruído de fundo (com pesos)
BACKGROUND_PORTS = {
    23: 30, 2323: 8, 80: 10, 8080: 8, 445: 6, 22: 6, 443: 5,
    8443: 3, 53: 2, 81: 2, 5555: 2, 3389: 3, 1433: 1, 7547: 2,
}
# países sorteados pelo ruído de fundo (com pesos)
BACKGROUND_COUNTRIES = {
    "US": 40, "GB": 8, "CN": 8, "DE": 7, "JP": 5, "MY": 3, "SG": 3,
    "TW": 3, "DK": 2, "PT": 2, "NL": 5, "BR": 4, "RU": 5, "IN": 5,
}

# rótulos de classe plantados por tipo de campanha
SYNTH_ASN_CLASS = {
    "persistent_scanner": "persistent_high",
    "bursty_spike":       "bursty_high",
}

SYNTH_ASN_BASE     = 4_200_000_000     # faixa privada de ASN de 32 bits
SYNTH_NETWORK_BASE = "20.0.0.0"        # um /16 por ASN a partir daqui
SYNTH_MAX_ASNS     = 100 * 256
SYNTH_DESTS        = 4096              # telescópio /20
SYNTH_DEST24S      = 16
SYNTH_BYTES_PER_PACKET = 40
SYNTH_PROBE_FLAGS       = "S"
SYNTH_BACKSCATTER_FLAGS = ("SA", "RA")
SYNTH_SHARE_TOLERANCE   = 0.02
SYNTH_DEMO_CONFIG  = ROOT_DIR / "configuracoes" / "demo_sintetico.json"

# parâmetros padrão do ruído de fundo (Pareto truncada)
SYNTH_PARETO_ALPHA = 0.5
SYNTH_VOLUME_MIN   = 1
SYNTH_VOLUME_MAX   = 1_000_000
SYNTH_BACKGROUND_ASNS = 50

# tabelas adicionais do pacote CSV (além das obrigatórias)
CSV_BUNDLE_EXTRA = ("hourly_asn_series.csv", "fingerprints.csv")
REPORT_DOCX_NAME = "report.docx"
DOCX_MAX_LINHAS = 500          # linhas por tabela nos documentos Word
RISK_LABELS = ("high", "low")
