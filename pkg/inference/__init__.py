# bst inference package
