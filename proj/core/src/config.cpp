namespace eme {}
