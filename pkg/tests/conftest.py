import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from database.connection import init_db
from services.quadratureService import build_direction_rule, build_sphere_rule


@pytest.fixture(scope="session")
def rule1():
    return build_direction_rule(1)


@pytest.fixture(scope="session")
def rule2():
    return build_direction_rule(2)


@pytest.fixture(scope="session")
def rule3():
    return build_direction_rule(3)


@pytest.fixture(scope="session")
def sphere2():
    return build_sphere_rule(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def db():
    """Sesión sobre SQLite en memoria con las tablas del registro"""
    engine = create_engine("sqlite://")
    init_db(bind=engine)
    session = sessionmaker(autocommit=False, autoflush=False, bind=engine)()
    try:
        yield session
    finally:
        session.close()
        engine.dispose()
