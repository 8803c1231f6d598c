# bst hom package
