# cli commands
