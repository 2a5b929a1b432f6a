import os
from pathlib import Path
from dotenv import load_dotenv

# Cargar variables de entorno
load_dotenv()

# Configuración base
BASE_DIR = Path(__file__).resolve().parent.parent
OUTPUT_DIR = Path(os.getenv("OUTPUT_DIR", str(BASE_DIR / "output")))

# Configuración de base de datos
DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///runs.db")
DB_ECHO = os.getenv("DB_ECHO", "false").lower() in ("1", "true", "yes")

# Configuración de logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = os.getenv("LOG_FORMAT", "%(asctime)s %(levelname)s %(name)s: %(message)s")

# Cuadratura de direcciones (peso e^{-|xi|^2})
R_MAX = float(os.getenv("R_MAX", "6.0"))
RADIAL_ORDER = int(os.getenv("RADIAL_ORDER", "32"))
ANGULAR_ORDER = int(os.getenv("ANGULAR_ORDER", "32"))
RULE_TOLERANCE = float(os.getenv("RULE_TOLERANCE", "1e-6"))

# Discretización: h = eps / H_FACTOR, nunca por debajo de MIN_H_FACTOR
H_FACTOR = int(os.getenv("H_FACTOR", "8"))
MIN_H_FACTOR = int(os.getenv("MIN_H_FACTOR", "4"))
MAX_CELLS = int(os.getenv("MAX_CELLS", "4000000"))

# Evaluación por bloques de direcciones
CHUNK_POINTS = int(os.getenv("CHUNK_POINTS", "2000000"))
WORKERS = int(os.getenv("WORKERS", "1"))

# Rebanadas
TRANSVERSE_LINES = int(os.getenv("TRANSVERSE_LINES", "400"))
JUMP_TOL = float(os.getenv("JUMP_TOL", "1e-12"))

# Minimización
NUCLEATION_AMPLITUDE = float(os.getenv("NUCLEATION_AMPLITUDE", "0.1"))
NOTCH_FRACTION = float(os.getenv("NOTCH_FRACTION", "0.35"))
THRESHOLD_WINDOW = float(os.getenv("THRESHOLD_WINDOW", "0.15"))
ARMIJO_C = float(os.getenv("ARMIJO_C", "1e-4"))
