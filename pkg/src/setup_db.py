"""
Script de inicialização do banco de resultados
Cria as tabelas de execuções, estimativas e traces
"""
import argparse
from typing import List, Optional

from models.models import Base
from sql.database import init_db


def main(argv: Optional[List[str]] = None, database_url: Optional[str] = None):
    parser = argparse.ArgumentParser(description='Inicializa o banco de resultados do laboratório UWB-ED')
    parser.add_argument('--recriar', action='store_true', help='remove as tabelas existentes antes de criar')
    args = parser.parse_args(argv)

    print("=" * 60)
    print("INICIALIZAÇÃO DO BANCO DE RESULTADOS")
    print("Laboratório UWB-ED")
    print("=" * 60)

    manager = init_db(database_url)
    if args.recriar:
        print("\nRemovendo tabelas existentes...")
        manager.drop_tables()
        manager.create_tables()

    print("\nTabelas criadas:")
    for name in sorted(Base.metadata.tables):
        print(f"  - {name}")
    print("\nPara migrações use: alembic upgrade head")
    print("=" * 60)
    return manager


if __name__ == "__main__":
    main()
