import os
import sys

# Agregar el directorio raíz al path de Python
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config.settings import DATABASE_URL
from database.connection import init_db


def create_tables():
    """Crea las tablas del registro de ejecuciones"""
    try:
        init_db()
        print(f"Tablas creadas en {DATABASE_URL}")
    except Exception as e:
        print(f"Error al crear las tablas: {str(e)}")
        raise


if __name__ == "__main__":
    create_tables()
