# =============================================================================
# A3T Desk - Configuration Module
# =============================================================================
"""
Runtime settings read from A3T_* environment variables.

Usage:
    from config import settings

    seed = settings.SEED
    tables = settings.RESOURCES_DIR / "tables"
"""

from config.settings import settings, Settings

__all__ = ['settings', 'Settings']
