# Monitoring package for the circuit optimizer
