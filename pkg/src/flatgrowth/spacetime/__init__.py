"""Forms, balance law, worldlines and currents on the spacetime R x R^2."""
