# respirad/constants.py

from scipy.constants import c as SPEED_OF_LIGHT  # 2.99792458e8 m/s, exacto

# --- Forma de onda de referencia (escena de dos sujetos sobre la cama) ---
DEFAULT_F_START_HZ = 60e9
DEFAULT_BANDWIDTH_HZ = 1.5e9
DEFAULT_CHIRP_DURATION_S = 2e-5     # PRI de 0.02 ms, chirps consecutivos
DEFAULT_CHIRPS_PER_FRAME = 1024
DEFAULT_FAST_TIME_SAMPLES = 80      # 80 muestras a 4 MHz -> bins de 0.10 m
DEFAULT_ADC_SAMPLE_RATE_HZ = 4e6
DEFAULT_DURATION_S = 60.0

# --- Escena ---
DEFAULT_REFLECTIVITY = 1.0
DEFAULT_BREATH_AMPLITUDE_M = 0.01
DEFAULT_BREATH_FREQUENCY_HZ = 0.3
DEFAULT_VIBRATION_AXIS = (0.0, 1.0)
DEFAULT_RNG_SEED = 0
SYNTH_BLOCK_SAMPLES = 1 << 22        # muestras complejas por bloque de síntesis (~32 MB en complex64)

# --- Procesado de rango ---
WINDOW_RECTANGULAR = "rectangular"
WINDOW_HANN = "hann"
SUPPORTED_WINDOWS = (WINDOW_RECTANGULAR, WINDOW_HANN)
DEFAULT_WINDOW = WINDOW_RECTANGULAR
DEFAULT_CFAR_GUARD_CELLS = 2
DEFAULT_CFAR_TRAINING_CELLS = 8
DEFAULT_CFAR_PFA = 1e-3
DEFAULT_BIN_EXPANSION = 1
DEFAULT_PROFILE_OVERSAMPLE = 16

# --- Respiración ---
DEFAULT_BAND_HZ = (0.1, 0.7)        # 6-42 bpm
BANDPASS_ORDER = 2

# --- Asociación ---
DEFAULT_GAMMA_TH = 0.3
DEFAULT_MAX_LAG_S = 5.0
DEFAULT_PEAK_TIE_TOLERANCE = 0.02
CLUSTER_LAG_TOLERANCE_SAMPLES = 2

# --- Estimación espectral ---
DEFAULT_ZERO_PAD_FACTOR = 8

# --- Archivo de cubo MSRC ---
CUBE_MAGIC = b"MSRC"
CUBE_FORMAT_VERSION = 1
CUBE_FORMAT_VERSION_FRAMED = 2      # igual que la 1 + frame_period f64
CUBE_FILE_SUFFIX = ".msrc"

# --- Salidas ---
CSV_FLOAT_FORMAT = ".9g"            # 9 cifras significativas

# --- Códigos de salida del CLI ---
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NO_DETECTIONS = 4
EXIT_NO_ASSOCIATIONS = 5
EXIT_EVAL_MISMATCH = 6
