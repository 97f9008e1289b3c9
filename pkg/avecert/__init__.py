"""avecert: unique-solvability certificates and solvers for absolute value matrix equations."""
