function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    const fs = require('fs');
    fs.readFileSync('/etc/passwd');
}
