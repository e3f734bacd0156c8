# Núcleo numérico: mallas, elementos finitos, estado, diseño y verificaciones
