package demo;

import java.security.KeyPair;
import java.security.KeyPairGenerator;

public class Vulnerable {
    public KeyPair newKeys() throws Exception {
        KeyPairGenerator generator = KeyPairGenerator.getInstance("RSA");
        generator.initialize(1024);
        return generator.generateKeyPair();
    }
}
