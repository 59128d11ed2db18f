"""Synthetic weather-type trajectories from first-order Markov chains."""
