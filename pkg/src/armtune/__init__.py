"""Two-link arm PID tuning with a real-coded genetic algorithm."""
