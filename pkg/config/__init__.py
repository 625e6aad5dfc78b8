# Presets package
