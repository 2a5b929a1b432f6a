from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

from config.settings import DATABASE_URL, DB_ECHO

Base = declarative_base()

# Crear el motor de la base de datos
engine = create_engine(DATABASE_URL, echo=DB_ECHO)

# Configurar la sesión
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


def init_db(bind=None):
    """Inicializa la base de datos creando todas las tablas"""
    # Importar los modelos aquí para asegurar que están registrados
    from models.SweepRun import SweepPoint, SweepRun  # noqa: F401

    Base.metadata.create_all(bind=bind or engine)


def get_db():
    """Proporciona una sesión de base de datos"""
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
