"""tabelas do banco de resultados

Revision ID: 0001
Revises:
Create Date: 2026-10-17
"""
from alembic import op
import sqlalchemy as sa

revision = '0001'
down_revision = None
branch_labels = None
depends_on = None


def upgrade() -> None:
    op.create_table(
        'simulation_runs',
        sa.Column('id', sa.Integer(), primary_key=True, autoincrement=True),
        sa.Column('command', sa.String(length=50), nullable=False),
        sa.Column('metric', sa.String(length=20), nullable=True),
        sa.Column('base_seed', sa.Integer(), nullable=False),
        sa.Column('parameters', sa.Text(), nullable=False),
        sa.Column('created_at', sa.DateTime(), nullable=False),
    )
    op.create_index('ix_simulation_runs_command', 'simulation_runs', ['command'])

    op.create_table(
        'estimates',
        sa.Column('id', sa.Integer(), primary_key=True, autoincrement=True),
        sa.Column('run_id', sa.Integer(), sa.ForeignKey('simulation_runs.id', ondelete='CASCADE'), nullable=False),
        sa.Column('k', sa.Integer(), nullable=False),
        sa.Column('trials', sa.Integer(), nullable=False),
        sa.Column('successes', sa.Integer(), nullable=False),
        sa.Column('p_hat', sa.Float(), nullable=False),
        sa.Column('ci_low', sa.Float(), nullable=False),
        sa.Column('ci_high', sa.Float(), nullable=False),
        sa.Column('analytic_p', sa.Float(), nullable=True),
        sa.Column('flagged', sa.Boolean(), nullable=False, server_default='0'),
    )
    op.create_index('ix_estimates_run_id', 'estimates', ['run_id'])

    op.create_table(
        'session_traces',
        sa.Column('id', sa.Integer(), primary_key=True, autoincrement=True),
        sa.Column('run_id', sa.Integer(), sa.ForeignKey('simulation_runs.id', ondelete='CASCADE'), nullable=False),
        sa.Column('session_id', sa.String(length=100), nullable=False),
        sa.Column('line_no', sa.Integer(), nullable=False),
        sa.Column('line', sa.String(length=500), nullable=False),
    )
    op.create_index('ix_session_traces_run_id', 'session_traces', ['run_id'])
    op.create_index('ix_session_traces_session_id', 'session_traces', ['session_id'])


def downgrade() -> None:
    op.drop_table('session_traces')
    op.drop_table('estimates')
    op.drop_table('simulation_runs')
