#!/usr/bin/env python3
"""
receptorlab - Point d'entree principal.
Simulation de la detection CSK sous interference moleculaire.
"""

import logging
import os
import sys

# Debug mode via environment variable
if os.environ.get("RECEPTORLAB_DEBUG") == "1":
    logging.basicConfig(level=logging.DEBUG)
    logging.debug("receptorlab DEBUG mode enabled")

# Ajouter la racine au path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
