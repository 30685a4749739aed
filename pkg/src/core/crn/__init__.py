"""Réalisations en réseaux de réactions des détecteurs à récepteurs."""
