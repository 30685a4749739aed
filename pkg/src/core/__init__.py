"""
Cœur de receptorlab
Statistiques de liaison, détecteurs, réseaux de réactions et moteur d'expériences.
"""
