"""Moteur de balayage, histogrammes et validation des réseaux de réactions."""
