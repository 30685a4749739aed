"""Statistiques de liaison ligand-récepteur et tirage des symboles."""
