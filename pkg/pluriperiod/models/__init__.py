# Models module initialization
