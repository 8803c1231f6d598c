# bst tofs package
