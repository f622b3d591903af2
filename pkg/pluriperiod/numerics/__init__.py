# Numerics module initialization
