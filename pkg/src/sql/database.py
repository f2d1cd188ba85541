"""
Configuração e gerenciamento do banco de resultados.
"""
import logging
from contextlib import contextmanager

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker, scoped_session
from sqlalchemy.pool import StaticPool

from constants.database import DATABASE_URL
from models.models import Base

logger = logging.getLogger(__name__)


class DatabaseManager:
    """Gerenciador de conexão com o banco de dados."""

    def __init__(self, database_url=None):
        """
        Inicializa o gerenciador de banco de dados.

        Args:
            database_url: URL de conexão do banco de dados.
                         Se None, usa constants.database.DATABASE_URL.
        """
        self.database_url = database_url or DATABASE_URL

        if self.database_url == 'sqlite://' or self.database_url == 'sqlite:///:memory:':
            # Em memória: uma única conexão compartilhada (testes)
            self.engine = create_engine(
                self.database_url,
                connect_args={'check_same_thread': False},
                poolclass=StaticPool,
                echo=False
            )
        elif self.database_url.startswith('sqlite'):
            self.engine = create_engine(
                self.database_url,
                connect_args={'check_same_thread': False},
                echo=False
            )
        else:
            # Configurações para MySQL
            self.engine = create_engine(
                self.database_url,
                pool_pre_ping=True,
                pool_recycle=3600,
                echo=False
            )

        # Session factory
        self.SessionLocal = scoped_session(
            sessionmaker(autocommit=False, autoflush=False, expire_on_commit=False, bind=self.engine)
        )

    def create_tables(self):
        """Cria todas as tabelas no banco de dados."""
        Base.metadata.create_all(bind=self.engine)
        logger.info("tabelas do banco de resultados criadas")

    def drop_tables(self):
        """Remove todas as tabelas do banco de dados."""
        Base.metadata.drop_all(bind=self.engine)
        logger.info("tabelas do banco de resultados removidas")

    @contextmanager
    def get_session(self):
        """
        Context manager para obter uma sessão do banco de dados.

        Uso:
            with db_manager.get_session() as session:
                session.query(SimulationRun).all()
        """
        session = self.SessionLocal()
        try:
            yield session
            session.commit()
        except Exception as e:
            session.rollback()
            raise e
        finally:
            session.close()

    def dispose(self):
        self.SessionLocal.remove()
        self.engine.dispose()


def init_db(database_url=None) -> DatabaseManager:
    """
    Inicializa o banco de resultados criando as tabelas.

    Args:
        database_url: URL de conexão (opcional)
    """
    manager = DatabaseManager(database_url)
    manager.create_tables()
    return manager
