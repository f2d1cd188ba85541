"""
Escrita dos CSVs versionados (primeira linha `# schema=1`).
"""
import logging
import sys
from typing import Iterable, Optional, Sequence

import pandas as pd

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def to_csv_text(df: pd.DataFrame, sort_by: Optional[Sequence[str]] = None) -> str:
    """CSV com cabeçalho de schema; ordenado pela chave da grade quando informada."""
    if sort_by:
        df = df.sort_values(list(sort_by), kind='mergesort')
    body = df.to_csv(index=False, lineterminator='\n')
    return f"# schema={SCHEMA_VERSION}\n{body}"


def write_csv(df: pd.DataFrame, out: Optional[str] = None, sort_by: Optional[Sequence[str]] = None) -> str:
    """Escreve em `out` (ou na saída padrão se None/'-') e retorna o texto."""
    text = to_csv_text(df, sort_by)
    _write(text, out)
    logger.info(f"CSV com {len(df)} linhas escrito em {out or 'stdout'}")
    return text


def write_lines(lines: Iterable[str], out: Optional[str] = None) -> None:
    _write(''.join(f"{line}\n" for line in lines), out)


def read_csv(path: str) -> pd.DataFrame:
    return pd.read_csv(path, comment='#')


def _write(text: str, out: Optional[str]) -> None:
    if out in (None, '-'):
        sys.stdout.write(text)
        return
    with open(out, 'w', encoding='utf-8', newline='') as fh:
        fh.write(text)
