"""Statistiques de décision, moments analytiques et détection à seuil."""
