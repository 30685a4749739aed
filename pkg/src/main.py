#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
receptorlab : simulation de détecteurs moléculaires robustes aux interférences.

Point d'entrée principal. La version effective est lue depuis
``src/__init__.__version__`` (source de vérité unique).
"""

import os
import sys

# Ajouter la racine du dépôt au path (imports ``src.``)
root_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if root_dir not in sys.path:
    sys.path.insert(0, root_dir)


def check_dependencies():
    """Vérifie que les dépendances requises sont installées."""
    missing = []

    for module, package in (("numpy", "numpy"), ("scipy", "scipy"), ("yaml", "PyYAML")):
        try:
            __import__(module)
        except ImportError:
            missing.append(package)

    if missing:
        print("=" * 60, file=sys.stderr)
        print("ERREUR: Dépendances manquantes", file=sys.stderr)
        print("=" * 60, file=sys.stderr)
        print(f"\n  pip install {' '.join(missing)}", file=sys.stderr)
        print("\nOu installez toutes les dépendances avec:", file=sys.stderr)
        print("  pip install -r requirements.txt", file=sys.stderr)
        sys.exit(1)


def main(argv=None) -> int:
    """Point d'entrée principal."""
    check_dependencies()

    from src.cli.sim_cli import main as cli_main

    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
