"""Geodesic flows of the Hunter-Saxton family on circle diffeomorphism semidirect products."""
