# Quantum circuit optimizer - source package
